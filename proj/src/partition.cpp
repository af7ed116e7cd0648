#include "palab/partition.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace palab {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[a] = b;
    }
};

}  // namespace

const char* family_name(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::P: return "P";
        case FamilyTag::B: return "B";
        case FamilyTag::S: return "S";
        case FamilyTag::H: return "H";
        case FamilyTag::Bs: return "Bs";
    }
    return "?";
}

FamilyTag parse_family(const std::string& name) {
    if (name == "P") return FamilyTag::P;
    if (name == "B") return FamilyTag::B;
    if (name == "S") return FamilyTag::S;
    if (name == "H") return FamilyTag::H;
    if (name == "Bs") return FamilyTag::Bs;
    throw std::invalid_argument("unknown family tag: " + name);
}

Partition Partition::of(int k, std::vector<std::vector<Point>> raw_blocks) {
    if (k < 0) throw MalformedPartition("negative k");
    const int n = 2 * k;
    std::vector<int> seen(n, 0);
    for (auto& b : raw_blocks) {
        if (b.empty()) throw MalformedPartition("empty block");
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        for (Point x : b) {
            if (x < 0 || x >= n) throw MalformedPartition("point outside {1..k,1'..k'}");
            if (seen[x]++) throw MalformedPartition("overlapping blocks");
        }
    }
    for (int x = 0; x < n; ++x)
        if (!seen[x]) throw MalformedPartition("blocks do not cover all points");
    std::sort(raw_blocks.begin(), raw_blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    Partition p;
    p.k_ = k;
    p.blocks_ = std::move(raw_blocks);
    return p;
}

Partition Partition::from_labels(int k, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != 2 * k) throw MalformedPartition("label vector size");
    std::unordered_map<int, std::vector<Point>> groups;
    for (int x = 0; x < 2 * k; ++x) groups[labels[x]].push_back(x);
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(groups.size());
    for (auto& [_, b] : groups) blocks.push_back(std::move(b));
    return of(k, std::move(blocks));
}

Partition Partition::identity(int k) {
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(k);
    for (int c = 1; c <= k; ++c) blocks.push_back({make_point(c, false), make_point(c, true)});
    return of(k, std::move(blocks));
}

Partition Partition::zero(int k) {
    if (k == 0) return Partition();
    std::vector<Point> all(2 * k);
    std::iota(all.begin(), all.end(), 0);
    return of(k, {all});
}

Partition Partition::singletons(int k) {
    std::vector<std::vector<Point>> blocks;
    for (int x = 0; x < 2 * k; ++x) blocks.push_back({x});
    return of(k, std::move(blocks));
}

Partition Partition::transposition(int k, int i, int j) {
    std::vector<int> sigma(k);
    std::iota(sigma.begin(), sigma.end(), 1);
    std::swap(sigma[i - 1], sigma[j - 1]);
    return from_permutation(sigma);
}

Partition Partition::weyl(int k, int i, int j) {
    if (i == j || i < 1 || j < 1 || i > k || j > k) throw MalformedPartition("bad weyl columns");
    std::vector<std::vector<Point>> blocks;
    blocks.push_back({make_point(i, false), make_point(j, false)});
    blocks.push_back({make_point(i, true), make_point(j, true)});
    for (int c = 1; c <= k; ++c)
        if (c != i && c != j) blocks.push_back({make_point(c, false), make_point(c, true)});
    return of(k, std::move(blocks));
}

Partition Partition::from_permutation(const std::vector<int>& sigma) {
    const int k = static_cast<int>(sigma.size());
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(k);
    for (int i = 1; i <= k; ++i) {
        int s = sigma[i - 1];
        if (s < 1 || s > k) throw MalformedPartition("bad permutation value");
        blocks.push_back({make_point(i, false), make_point(s, true)});
    }
    return of(k, std::move(blocks));
}

Partition Partition::full_cycle(int k) {
    std::vector<int> sigma(k);
    for (int i = 0; i < k; ++i) sigma[i] = (i + 1) % k + 1;
    return from_permutation(sigma);
}

std::vector<int> Partition::labels() const {
    std::vector<int> lab(2 * k_, -1);
    for (int b = 0; b < nc(); ++b)
        for (Point x : blocks_[b]) lab[x] = b;
    return lab;
}

bool Partition::operator<(const Partition& o) const {
    if (k_ != o.k_) return k_ < o.k_;
    return blocks_ < o.blocks_;
}

std::string to_string(const Partition& p) {
    std::string out;
    for (const auto& b : p.blocks()) {
        out += '{';
        for (size_t i = 0; i < b.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(point_col(b[i]));
            if (point_primed(b[i])) out += '\'';
        }
        out += '}';
    }
    return out;
}

Partition parse_partition(const std::string& s) {
    std::vector<std::vector<Point>> blocks;
    size_t i = 0;
    int max_col = 0;
    while (i < s.size()) {
        if (s[i] != '{') throw MalformedPartition("expected '{' in partition string");
        ++i;
        std::vector<Point> block;
        while (i < s.size() && s[i] != '}') {
            while (i < s.size() && s[i] == ' ') ++i;
            if (i < s.size() && s[i] == '}') break;
            size_t j = i;
            while (j < s.size() && isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j == i) throw MalformedPartition("expected digit in partition string");
            int col = std::stoi(s.substr(i, j - i));
            bool primed = j < s.size() && s[j] == '\'';
            if (primed) ++j;
            block.push_back(make_point(col, primed));
            max_col = std::max(max_col, col);
            i = j;
        }
        if (i >= s.size()) throw MalformedPartition("unterminated block");
        ++i;  // '}'
        blocks.push_back(std::move(block));
    }
    return Partition::of(max_col, std::move(blocks));
}

size_t PartitionHash::operator()(const Partition& p) const {
    size_t h = 1469598103934665603ull ^ static_cast<size_t>(p.k());
    for (const auto& b : p.blocks()) {
        for (Point x : b) h = (h ^ static_cast<size_t>(x + 1)) * 1099511628211ull;
        h = (h ^ 0x9e3779b97f4a7c15ull) * 1099511628211ull;
    }
    return h;
}

int cycles(const Partition& p) {
    const int k = p.k();
    UnionFind uf(2 * k);
    for (const auto& b : p.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
    for (int c = 1; c <= k; ++c) uf.unite(make_point(c, false), make_point(c, true));
    int count = 0;
    for (int x = 0; x < 2 * k; ++x)
        if (uf.find(x) == x) ++count;
    return count;
}

std::vector<std::vector<Point>> cycle_sets(const Partition& p) {
    const int k = p.k();
    UnionFind uf(2 * k);
    for (const auto& b : p.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
    for (int c = 1; c <= k; ++c) uf.unite(make_point(c, false), make_point(c, true));
    std::map<int, std::vector<Point>> groups;
    for (int x = 0; x < 2 * k; ++x) groups[uf.find(x)].push_back(x);
    std::vector<std::vector<Point>> out;
    out.reserve(groups.size());
    for (auto& [root, pts] : groups) out.push_back(std::move(pts));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

PartitionStats stats(const Partition& p) {
    PartitionStats st;
    st.nc = p.nc();
    auto cyc = cycle_sets(p);
    st.cycles = static_cast<int>(cyc.size());
    st.irreducible = st.cycles == 1 && p.k() > 0;

    auto lab = p.labels();
    int non_identity = 0;
    int non_single_block = 0;
    for (const auto& c : cyc) {
        bool identity_col = c.size() == 2 && lab[c[0]] == lab[c[1]];
        bool single_block = true;
        for (size_t i = 1; i < c.size(); ++i)
            if (lab[c[i]] != lab[c[0]]) single_block = false;
        if (!identity_col) ++non_identity;
        if (!single_block) ++non_single_block;
    }
    st.weakly_irreducible = p.k() > 0 && non_identity <= 1;
    st.exclusive_irreducible = p.k() > 0 && non_single_block <= 1;
    return st;
}

Partition transpose(const Partition& p) {
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(p.nc());
    for (const auto& b : p.blocks()) {
        std::vector<Point> nb;
        nb.reserve(b.size());
        for (Point x : b) nb.push_back(x ^ 1);
        blocks.push_back(std::move(nb));
    }
    return Partition::of(p.k(), std::move(blocks));
}

Partition join(const Partition& p, const Partition& q) {
    if (p.k() != q.k()) throw SizeMismatch("join: size mismatch");
    const int n = 2 * p.k();
    UnionFind uf(n);
    for (const auto& b : p.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
    for (const auto& b : q.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
    std::vector<int> lab(n);
    for (int x = 0; x < n; ++x) lab[x] = uf.find(x);
    return Partition::from_labels(p.k(), lab);
}

ComposeResult compose(const Partition& p, const Partition& q) {
    if (p.k() != q.k()) throw SizeMismatch("compose: size mismatch");
    const int k = p.k();
    // Rows: top = q's unprimed [0,k), middle = q's primed = p's unprimed
    // [k,2k), bottom = p's primed [2k,3k).
    UnionFind uf(3 * k);
    auto q_node = [k](Point x) { return point_primed(x) ? k + point_col(x) - 1 : point_col(x) - 1; };
    auto p_node = [k](Point x) { return point_primed(x) ? 2 * k + point_col(x) - 1 : k + point_col(x) - 1; };
    for (const auto& b : q.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(q_node(b[0]), q_node(b[i]));
    for (const auto& b : p.blocks())
        for (size_t i = 1; i < b.size(); ++i) uf.unite(p_node(b[0]), p_node(b[i]));

    std::vector<int> lab(2 * k);
    for (int c = 1; c <= k; ++c) {
        lab[make_point(c, false)] = uf.find(c - 1);
        lab[make_point(c, true)] = uf.find(2 * k + c - 1);
    }
    std::vector<char> touches_outer(3 * k, 0);
    for (int c = 0; c < k; ++c) {
        touches_outer[uf.find(c)] = 1;
        touches_outer[uf.find(2 * k + c)] = 1;
    }
    int kappa = 0;
    for (int m = k; m < 2 * k; ++m)
        if (uf.find(m) == m && !touches_outer[m]) ++kappa;
    ComposeResult res{Partition::from_labels(k, lab), kappa};
    return res;
}

Partition tensor(const Partition& p, const Partition& q) {
    const int kp = p.k();
    std::vector<std::vector<Point>> blocks = p.blocks();
    for (const auto& b : q.blocks()) {
        std::vector<Point> nb;
        nb.reserve(b.size());
        for (Point x : b) nb.push_back(make_point(point_col(x) + kp, point_primed(x)));
        blocks.push_back(std::move(nb));
    }
    return Partition::of(kp + q.k(), std::move(blocks));
}

Partition extract(const Partition& p, const std::vector<Point>& points) {
    std::vector<Point> pts = points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<char> in(2 * p.k(), 0);
    for (Point x : pts) {
        if (x < 0 || x >= 2 * p.k()) throw MalformedPartition("extract: point out of range");
        in[x] = 1;
    }
    for (int c = 1; c <= p.k(); ++c)
        if (in[make_point(c, false)] != in[make_point(c, true)])
            throw MalformedPartition("extract: point set not symmetric");
    std::vector<int> new_col(p.k() + 1, 0);
    int next = 0;
    for (int c = 1; c <= p.k(); ++c)
        if (in[make_point(c, false)]) new_col[c] = ++next;
    std::vector<std::vector<Point>> blocks;
    for (const auto& b : p.blocks()) {
        std::vector<Point> nb;
        for (Point x : b)
            if (in[x]) nb.push_back(make_point(new_col[point_col(x)], point_primed(x)));
        if (!nb.empty()) blocks.push_back(std::move(nb));
    }
    return Partition::of(next, std::move(blocks));
}

Partition left_part(const Partition& p, int k1) {
    std::vector<Point> pts;
    for (int c = 1; c <= k1; ++c) {
        pts.push_back(make_point(c, false));
        pts.push_back(make_point(c, true));
    }
    return extract(p, pts);
}

Partition right_part(const Partition& p, int k1) {
    std::vector<Point> pts;
    for (int c = k1 + 1; c <= p.k(); ++c) {
        pts.push_back(make_point(c, false));
        pts.push_back(make_point(c, true));
    }
    return extract(p, pts);
}

Partition insert(const Partition& p, int l, const std::vector<int>& positions) {
    if (static_cast<int>(positions.size()) != p.k())
        throw SizeMismatch("insert: positions length != k(p)");
    std::vector<char> used(l + 1, 0);
    int prev = 0;
    for (int pos : positions) {
        if (pos < 1 || pos > l || pos <= prev) throw MalformedPartition("insert: bad positions");
        used[pos] = 1;
        prev = pos;
    }
    std::vector<std::vector<Point>> blocks;
    for (const auto& b : p.blocks()) {
        std::vector<Point> nb;
        nb.reserve(b.size());
        for (Point x : b) nb.push_back(make_point(positions[point_col(x) - 1], point_primed(x)));
        blocks.push_back(std::move(nb));
    }
    for (int c = 1; c <= l; ++c)
        if (!used[c]) blocks.push_back({make_point(c, false), make_point(c, true)});
    return Partition::of(l, std::move(blocks));
}

Partition flip(const Partition& p, int k1) {
    if (k1 < 0 || k1 > p.k()) throw MalformedPartition("flip: k1 out of range");
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(p.nc());
    for (const auto& b : p.blocks()) {
        std::vector<Point> nb;
        nb.reserve(b.size());
        for (Point x : b) nb.push_back(point_col(x) > k1 ? (x ^ 1) : x);
        blocks.push_back(std::move(nb));
    }
    return Partition::of(p.k(), std::move(blocks));
}

Partition kernel(const std::vector<long>& values) {
    if (values.size() % 2 != 0) throw MalformedPartition("kernel: odd tuple length");
    const int k = static_cast<int>(values.size()) / 2;
    std::map<long, std::vector<Point>> groups;
    for (int x = 0; x < 2 * k; ++x) {
        if (values[x] <= 0) throw MalformedPartition("kernel: indices must be positive");
        groups[values[x]].push_back(x);
    }
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(groups.size());
    for (auto& [v, b] : groups) blocks.push_back(std::move(b));
    return Partition::of(k, std::move(blocks));
}

Partition conjugate(const Partition& p, const std::vector<int>& sigma) {
    if (static_cast<int>(sigma.size()) != p.k()) throw SizeMismatch("conjugate: sigma length");
    std::vector<std::vector<Point>> blocks;
    blocks.reserve(p.nc());
    for (const auto& b : p.blocks()) {
        std::vector<Point> nb;
        nb.reserve(b.size());
        for (Point x : b) nb.push_back(make_point(sigma[point_col(x) - 1], point_primed(x)));
        blocks.push_back(std::move(nb));
    }
    return Partition::of(p.k(), std::move(blocks));
}

bool is_finer(const Partition& p, const Partition& q) {
    if (p.k() != q.k()) throw SizeMismatch("is_finer: size mismatch");
    auto qlab = q.labels();
    for (const auto& b : p.blocks())
        for (size_t i = 1; i < b.size(); ++i)
            if (qlab[b[i]] != qlab[b[0]]) return false;
    return true;
}

Rational distance(const Partition& p, const Partition& q) {
    Rational d = Rational(p.nc() + q.nc(), 2) - Rational(nc(join(p, q)));
    d.canonicalize();
    return d;
}

Rational defect(const Partition& p, const Partition& q) {
    const Partition id = Partition::identity(p.k());
    return distance(id, q) - distance(id, p) - distance(p, q);
}

bool leq(const Partition& p, const Partition& q) { return defect(p, q) == 0; }

OrderReport compare(const Partition& p, const Partition& q) {
    if (p.k() != q.k()) throw SizeMismatch("compare: size mismatch");
    OrderReport r;
    r.distance = distance(p, q);
    r.defect = defect(p, q);
    r.leq = r.defect == 0;
    r.finer = is_finer(p, q);
    const int cp = cycles(p), cq = cycles(q);
    r.coarser_compatible = is_finer(q, p) && cp == cq;
    r.finer_compatible = r.finer && (p.nc() - cp) == (q.nc() - cq);
    return r;
}

std::vector<Splitting> splittings(const Partition& p) {
    auto cyc = cycle_sets(p);
    const int m = static_cast<int>(cyc.size());
    if (m > 30) throw CapacityError("splittings: too many cycles");
    std::vector<Splitting> out;
    out.reserve(size_t(1) << m);
    std::vector<Point> all(2 * p.k());
    std::iota(all.begin(), all.end(), 0);
    for (uint32_t mask = 0; mask < (uint32_t(1) << m); ++mask) {
        std::vector<Point> pts;
        for (int i = 0; i < m; ++i)
            if (mask & (uint32_t(1) << i)) pts.insert(pts.end(), cyc[i].begin(), cyc[i].end());
        std::vector<Point> comp;
        std::vector<char> in(2 * p.k(), 0);
        for (Point x : pts) in[x] = 1;
        for (Point x : all)
            if (!in[x]) comp.push_back(x);
        std::sort(pts.begin(), pts.end());
        out.push_back({extract(p, pts), extract(p, comp), pts});
    }
    return out;
}

Partition product_geodesic_target(const Partition& p) {
    const int k = p.k();
    // tau = (1,k+1)(2,k+2)...(k,2k) in S_2k.
    std::vector<int> tau(2 * k);
    for (int i = 1; i <= k; ++i) {
        tau[i - 1] = k + i;
        tau[k + i - 1] = i;
    }
    return compose(tensor(p, Partition::identity(k)), Partition::from_permutation(tau)).p;
}

std::vector<std::pair<Partition, Partition>> product_index_set(const Partition& p) {
    const int k = p.k();
    const auto& all = enumerate_family(k, FamilyTag::P);
    const Partition target = product_geodesic_target(p);
    std::vector<std::pair<Partition, Partition>> out;
    for (const auto& p1 : all) {
        if (!leq(p1, p)) continue;  // necessary by the geodesic condition
        const Partition bound = compose(transpose(p1), p).p;
        for (const auto& p2 : all) {
            if (!leq(p2, bound)) continue;
            if (compose(p1, p2).p != p) continue;
            if (leq(tensor(p1, p2), target)) out.emplace_back(p1, p2);
        }
    }
    return out;
}

namespace {
int g_orbit_cap = 8;
std::mutex g_cap_mutex;
std::map<FamilyTag, int> g_enum_caps = {
    {FamilyTag::P, 4}, {FamilyTag::B, 6}, {FamilyTag::S, 6}, {FamilyTag::H, 5}, {FamilyTag::Bs, 6}};
}  // namespace

int orbit_cap() { return g_orbit_cap; }
void set_orbit_cap(int cap) { g_orbit_cap = cap; }

int enumeration_cap(FamilyTag tag) {
    std::lock_guard<std::mutex> lock(g_cap_mutex);
    return g_enum_caps[tag];
}

void set_enumeration_cap(FamilyTag tag, int cap) {
    std::lock_guard<std::mutex> lock(g_cap_mutex);
    g_enum_caps[tag] = cap;
}

namespace {

// Memoized orbit data: the representative and, for every sigma achieving it,
// the induced word permutation new_word[i] = word[perm[i]].
struct OrbitInfo {
    Partition rep;
    std::vector<std::vector<int>> word_perms;
};

std::mutex g_orbit_mutex;
std::unordered_map<std::string, OrbitInfo> g_orbit_cache;

const OrbitInfo& orbit_info(const Partition& p) {
    const int k = p.k();
    if (k > g_orbit_cap)
        throw CapacityError("orbit_rep: k exceeds orbit cap " + std::to_string(g_orbit_cap));
    const std::string key = std::to_string(k) + "|" + to_string(p);
    {
        std::lock_guard<std::mutex> lock(g_orbit_mutex);
        auto it = g_orbit_cache.find(key);
        if (it != g_orbit_cache.end()) return it->second;
    }
    std::vector<int> sigma(k);
    std::iota(sigma.begin(), sigma.end(), 1);
    OrbitInfo info;
    info.rep = p;
    bool first = true;
    do {
        Partition c = conjugate(p, sigma);
        if (first || c < info.rep) {
            info.rep = c;
            info.word_perms.clear();
            first = false;
        }
        if (c == info.rep) {
            // (w o sigma^{-1})_i = w_{sigma^{-1}(i)}: perm[i] = sigma^{-1}(i+1)-1
            std::vector<int> perm(k);
            for (int i = 1; i <= k; ++i) perm[sigma[i - 1] - 1] = i - 1;
            info.word_perms.push_back(std::move(perm));
        }
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    std::lock_guard<std::mutex> lock(g_orbit_mutex);
    return g_orbit_cache.emplace(key, std::move(info)).first->second;
}

}  // namespace

Partition orbit_rep(const Partition& p) { return orbit_info(p).rep; }

std::pair<Partition, std::vector<std::string>> orbit_rep_with_word(
    const Partition& p, const std::vector<std::string>& word) {
    const int k = p.k();
    if (static_cast<int>(word.size()) != k) throw SizeMismatch("orbit_rep_with_word: word length");
    const OrbitInfo& info = orbit_info(p);
    std::vector<std::string> best_w;
    std::vector<std::string> w(k);
    bool first = true;
    for (const auto& perm : info.word_perms) {
        for (int i = 0; i < k; ++i) w[i] = word[perm[i]];
        if (first || w < best_w) {
            best_w = w;
            first = false;
        }
    }
    if (first) best_w = word;  // k == 0
    return {info.rep, best_w};
}

bool family_member(const Partition& p, FamilyTag tag) {
    switch (tag) {
        case FamilyTag::P:
            return true;
        case FamilyTag::B:
            for (const auto& b : p.blocks())
                if (b.size() != 2) return false;
            return true;
        case FamilyTag::S:
            for (const auto& b : p.blocks()) {
                if (b.size() != 2) return false;
                if (point_primed(b[0]) == point_primed(b[1])) return false;
            }
            return true;
        case FamilyTag::H:
            for (const auto& b : p.blocks())
                if (b.size() % 2 != 0) return false;
            return true;
        case FamilyTag::Bs:
            for (const auto& b : p.blocks())
                if (b.size() > 2) return false;
            return true;
    }
    return false;
}

namespace {

std::mutex g_family_mutex;
std::map<std::pair<int, int>, std::vector<Partition>> g_family_cache;

std::vector<Partition> generate_family(int k, FamilyTag tag) {
    std::vector<Partition> out;
    if (k == 0) {
        out.push_back(Partition());
        return out;
    }
    const int n = 2 * k;
    // Restricted growth strings in lexicographic order: deterministic.
    std::vector<int> rgs(n, 0);
    while (true) {
        Partition p = Partition::from_labels(k, rgs);
        if (family_member(p, tag)) out.push_back(p);
        int i = n - 1;
        for (; i > 0; --i) {
            int maxv = 0;
            for (int j = 0; j < i; ++j) maxv = std::max(maxv, rgs[j]);
            if (rgs[i] <= maxv) {
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                break;
            }
        }
        if (i == 0) break;
    }
    return out;
}

}  // namespace

const std::vector<Partition>& enumerate_family(int k, FamilyTag tag) {
    if (k < 0) throw MalformedPartition("enumerate_family: negative k");
    {
        std::lock_guard<std::mutex> lock(g_cap_mutex);
        if (k > g_enum_caps[tag])
            throw CapacityError("enumerate_family: k=" + std::to_string(k) + " exceeds cap " +
                                std::to_string(g_enum_caps[tag]) + " for family " + family_name(tag));
    }
    std::lock_guard<std::mutex> lock(g_family_mutex);
    auto key = std::make_pair(k, static_cast<int>(tag));
    auto it = g_family_cache.find(key);
    if (it == g_family_cache.end()) it = g_family_cache.emplace(key, generate_family(k, tag)).first;
    return it->second;
}

int family_index(int k, FamilyTag tag, const Partition& p) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unordered_map<std::string, int>> index_cache;
    const auto& items = enumerate_family(k, tag);
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(k, static_cast<int>(tag));
    auto it = index_cache.find(key);
    if (it == index_cache.end()) {
        std::unordered_map<std::string, int> m;
        m.reserve(items.size() * 2);
        for (size_t i = 0; i < items.size(); ++i) m[to_string(items[i])] = static_cast<int>(i);
        it = index_cache.emplace(key, std::move(m)).first;
    }
    auto jt = it->second.find(to_string(p));
    return jt == it->second.end() ? -1 : jt->second;
}

std::vector<uint8_t> join_nc_table(const std::vector<Partition>& items) {
    const size_t n = items.size();
    std::vector<uint8_t> table(n * n);
    if (n == 0) return table;
    const int k = items[0].k();
    std::vector<std::vector<int>> labs(n);
    for (size_t i = 0; i < n; ++i) labs[i] = items[i].labels();
    std::vector<int> parent(2 * k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            std::iota(parent.begin(), parent.end(), 0);
            auto find = [&](int x) {
                while (parent[x] != x) {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                return x;
            };
            auto unite = [&](int a, int b) {
                a = find(a);
                b = find(b);
                if (a != b) parent[a] = b;
            };
            const auto& la = labs[i];
            const auto& lb = labs[j];
            std::vector<int> first_a(items[i].nc(), -1), first_b(items[j].nc(), -1);
            for (int x = 0; x < 2 * k; ++x) {
                if (first_a[la[x]] < 0) first_a[la[x]] = x; else unite(first_a[la[x]], x);
                if (first_b[lb[x]] < 0) first_b[lb[x]] = x; else unite(first_b[lb[x]], x);
            }
            int count = 0;
            for (int x = 0; x < 2 * k; ++x)
                if (find(x) == x) ++count;
            table[i * n + j] = table[j * n + i] = static_cast<uint8_t>(count);
        }
    }
    return table;
}

}  // namespace palab
