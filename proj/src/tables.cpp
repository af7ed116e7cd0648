#include "palab/tables.hpp"

#include <json.hpp>
#include <mutex>
#include <set>

namespace palab {

Word constant_word(int k, const std::string& label) { return Word(size_t(k), label); }

void TableData::set(const Partition& p, const Word& w, const Rational& v) {
    if (static_cast<int>(w.size()) != p.k()) throw SizeMismatch("table set: word length != k");
    auto [cp, cw] = orbit_rep_with_word(p, w);
    Rational c = v;
    c.canonicalize();
    entries_[TableKey{cp, cw}] = c;
}

const Rational* TableData::find(const Partition& p, const Word& w) const {
    if (static_cast<int>(w.size()) != p.k()) throw SizeMismatch("table find: word length != k");
    auto [cp, cw] = orbit_rep_with_word(p, w);
    auto it = entries_.find(TableKey{cp, cw});
    return it == entries_.end() ? nullptr : &it->second;
}

Rational TableData::at(const Partition& p, const Word& w) const {
    if (p.k() == 0) {
        auto it = entries_.find(TableKey{Partition(), {}});
        return it == entries_.end() ? Rational(1) : it->second;  // m_empty = 1
    }
    const Rational* v = find(p, w);
    if (!v) throw MissingEntry("table missing entry for " + to_string(p));
    return *v;
}

std::vector<int> TableData::grades() const {
    std::set<int> ks;
    for (const auto& [key, _] : entries_) ks.insert(key.p.k());
    return {ks.begin(), ks.end()};
}

std::vector<Word> TableData::words_of_grade(int k) const {
    std::set<Word> ws;
    for (const auto& [key, _] : entries_)
        if (key.p.k() == k) ws.insert(key.word);
    return {ws.begin(), ws.end()};
}

SpectralFormD to_numeric(const SpectralForm& f) {
    SpectralFormD out;
    out.is_character = f.is_character;
    out.is_infinitesimal_character = f.is_infinitesimal_character;
    for (const auto& [p, v] : f.values) out.values[p] = to_double(v);
    return out;
}

bool infinitesimal_support_ok(const SpectralForm& f, bool multiplicative) {
    for (const auto& [p, v] : f.values) {
        if (v == 0) continue;
        auto st = stats(p);
        if (multiplicative ? !st.weakly_irreducible : !st.irreducible) return false;
    }
    return true;
}

namespace {
std::mutex g_order_mutex;
std::map<std::pair<int, int>, FamilyOrder> g_order_cache;
}  // namespace

const FamilyOrder& family_order(int k, FamilyTag tag) {
    std::lock_guard<std::mutex> lock(g_order_mutex);
    auto key = std::make_pair(k, static_cast<int>(tag));
    auto it = g_order_cache.find(key);
    if (it != g_order_cache.end()) return it->second;

    FamilyOrder fo;
    const auto& items = enumerate_family(k, tag);
    fo.items = &items;
    const size_t n = items.size();
    auto ncj = join_nc_table(items);
    std::vector<int> ncs(n), cyc(n);
    for (size_t i = 0; i < n; ++i) {
        ncs[i] = items[i].nc();
        cyc[i] = cycles(items[i]);
    }
    fo.d2_id.resize(n);
    for (size_t i = 0; i < n; ++i) fo.d2_id[i] = k + ncs[i] - 2 * cyc[i];
    fo.leq_down.resize(n);
    fo.coarser_comp.resize(n);
    fo.finer_comp.resize(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const int d2 = ncs[i] + ncs[j] - 2 * ncj[i * n + j];
            // items[j] <= items[i]: df = d(id,i) - d(id,j) - d(j,i) = 0
            if (fo.d2_id[i] - fo.d2_id[j] - d2 == 0) fo.leq_down[i].push_back(static_cast<int>(j));
            // items[j] coarser than items[i]: join(i,j) = j
            const bool j_coarser = ncj[i * n + j] == ncs[j];
            if (j_coarser && cyc[i] == cyc[j]) fo.coarser_comp[i].push_back(static_cast<int>(j));
            const bool j_finer = ncj[i * n + j] == ncs[i];
            if (j_finer && (ncs[j] - cyc[j]) == (ncs[i] - cyc[i]))
                fo.finer_comp[i].push_back(static_cast<int>(j));
        }
    }
    return g_order_cache.emplace(key, std::move(fo)).first->second;
}

namespace {

// Dense per-(grade, word) slice of a table over a family enumeration.
std::vector<Rational> dense_slice(const TableData& t, int k, FamilyTag tag, const Word& w) {
    const auto& items = enumerate_family(k, tag);
    std::vector<Rational> v(items.size());
    for (size_t i = 0; i < items.size(); ++i) v[i] = t.at(items[i], w);
    return v;
}

void write_slice(TableData& t, int k, FamilyTag tag, const Word& w,
                 const std::vector<Rational>& vals) {
    const auto& items = enumerate_family(k, tag);
    for (size_t i = 0; i < items.size(); ++i) t.set(items[i], w, vals[i]);
}

}  // namespace

CumulantTable moments_to_cumulants(const MomentTable& m, FamilyTag tag) {
    CumulantTable out;
    out.tag = tag;
    for (int k : m.grades()) {
        if (k == 0) continue;
        const auto& fo = family_order(k, tag);
        const size_t n = fo.items->size();
        // topological order: increasing d(id, p)
        std::vector<int> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fo.d2_id[a] < fo.d2_id[b]; });
        for (const Word& w : m.words_of_grade(k)) {
            auto mv = dense_slice(m, k, tag, w);
            std::vector<Rational> kv(n);
            for (int i : order) {
                Rational s = mv[i];
                for (int j : fo.leq_down[i]) s -= kv[j];
                kv[i] = s;
            }
            write_slice(out, k, tag, w, kv);
        }
    }
    return out;
}

MomentTable cumulants_to_moments(const CumulantTable& kt) {
    MomentTable out;
    out.tag = kt.tag;
    for (int k : kt.grades()) {
        if (k == 0) continue;
        const auto& fo = family_order(k, kt.tag);
        const size_t n = fo.items->size();
        for (const Word& w : kt.words_of_grade(k)) {
            auto kv = dense_slice(kt, k, kt.tag, w);
            std::vector<Rational> mv(n);
            for (size_t i = 0; i < n; ++i) {
                Rational s = kv[i];
                for (int j : fo.leq_down[i]) s += kv[j];
                mv[i] = s;
            }
            write_slice(out, k, kt.tag, w, mv);
        }
    }
    return out;
}

bool family_nested(FamilyTag sub, FamilyTag super) {
    if (sub == super) return true;
    if (super == FamilyTag::P) return true;
    if (sub == FamilyTag::S)
        return super == FamilyTag::B || super == FamilyTag::H || super == FamilyTag::Bs;
    if (sub == FamilyTag::B) return super == FamilyTag::H;
    return false;
}

MomentTable restrict_table(const MomentTable& m, FamilyTag from, FamilyTag to) {
    if (!family_nested(to, from)) throw std::invalid_argument("restrict: families not nested");
    MomentTable out;
    out.tag = to;
    for (const auto& [key, v] : m.entries())
        if (family_member(key.p, to)) out.set(key.p, key.word, v);
    return out;
}

MomentTable extend_table(const MomentTable& m, FamilyTag from, FamilyTag to) {
    if (!family_nested(from, to)) throw std::invalid_argument("extend: families not nested");
    CumulantTable kt = moments_to_cumulants(m, from);
    MomentTable out;
    out.tag = to;
    for (int k : m.grades()) {
        if (k == 0) continue;
        const auto& sub = enumerate_family(k, from);
        const auto& super = enumerate_family(k, to);
        for (const Word& w : m.words_of_grade(k)) {
            auto kv = dense_slice(kt, k, from, w);
            for (const auto& p : super) {
                Rational s(0);
                for (size_t j = 0; j < sub.size(); ++j)
                    if (leq(sub[j], p)) s += kv[j];
                out.set(p, w, s);
            }
        }
    }
    return out;
}

MomentTable exclusive_transform(const MomentTable& m_in, FamilyTag tag, ExclusiveDirection dir) {
    const MomentTable* m = &m_in;
    MomentTable extended;
    if (tag != FamilyTag::P && dir == ExclusiveDirection::to_exclusive) {
        extended = extend_table(m_in, tag, FamilyTag::P);
        m = &extended;
    }
    MomentTable out;
    out.tag = FamilyTag::P;
    for (int k : m->grades()) {
        if (k == 0) continue;
        const auto& fo = family_order(k, FamilyTag::P);
        const auto& items = *fo.items;
        const size_t n = items.size();
        std::vector<int> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        // p' -| p strict implies nc(p') < nc(p): coarsest first
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return items[a].nc() < items[b].nc(); });
        for (const Word& w : m->words_of_grade(k)) {
            auto mv = dense_slice(*m, k, FamilyTag::P, w);
            std::vector<Rational> ev(n);
            if (dir == ExclusiveDirection::to_exclusive) {
                for (int i : order) {
                    Rational s = mv[i];
                    for (int j : fo.coarser_comp[i]) s -= ev[j];
                    ev[i] = s;
                }
            } else {
                for (size_t i = 0; i < n; ++i) {
                    Rational s = mv[i];
                    for (int j : fo.coarser_comp[i]) s += mv[j];
                    ev[i] = s;
                }
            }
            write_slice(out, k, FamilyTag::P, w, ev);
        }
    }
    return out;
}

Rational cumulants_to_exclusive(const CumulantTable& kt, const Partition& p, const Word& w) {
    const int k = p.k();
    Rational s(0);
    for (const auto& q : enumerate_family(k, kt.tag)) {
        // q finer-compatible with p
        if (!is_finer(q, p)) continue;
        if (q.nc() - cycles(q) != p.nc() - cycles(p)) continue;
        if (const Rational* v = kt.find(q, w)) s += *v;
    }
    return s;
}

std::pair<Partition, Word> expanded_key(const Partition& p,
                                        const std::vector<Word>& product_words) {
    if (static_cast<int>(product_words.size()) != p.k())
        throw SizeMismatch("expand_products: word count != k");
    int n = 0;
    std::vector<int> positions;
    Word flat;
    std::vector<int> sigma;
    for (const auto& pw : product_words) {
        if (pw.empty()) throw std::invalid_argument("expand_products: empty product word");
        positions.push_back(n + 1);
        const int start = n;
        for (const auto& lbl : pw) flat.push_back(lbl);
        n += static_cast<int>(pw.size());
        // cyclic permutation (start+1, ..., n) on this group
        for (int i = start + 1; i < n; ++i) sigma.push_back(i + 1);
        sigma.push_back(start + 1);
    }
    Partition ins = insert(p, n, positions);
    Partition sp = Partition::from_permutation(sigma);
    return {compose(ins, sp).p, flat};
}

Rational expand_products(const MomentTable& m, const Partition& p,
                         const std::vector<Word>& product_words) {
    auto [key, word] = expanded_key(p, product_words);
    return m.at(key, word);
}

namespace {
void split_word(const Word& w, int k1, Word& a, Word& b) {
    a.assign(w.begin(), w.begin() + k1);
    b.assign(w.begin() + k1, w.end());
}
}  // namespace

bool moments_factorize(const MomentTable& m, const std::string& label, int k_cap) {
    for (int k = 2; k <= k_cap; ++k) {
        Word w = constant_word(k, label);
        for (int k1 = 1; k1 < k; ++k1) {
            Word wa, wb;
            split_word(w, k1, wa, wb);
            for (const auto& p1 : enumerate_family(k1, FamilyTag::P))
                for (const auto& p2 : enumerate_family(k - k1, FamilyTag::P)) {
                    const Rational* lhs = m.find(tensor(p1, p2), w);
                    const Rational* r1 = m.find(p1, wa);
                    const Rational* r2 = m.find(p2, wb);
                    if (!lhs || !r1 || !r2) continue;
                    if (*lhs != *r1 * *r2) return false;
                }
        }
    }
    return true;
}

bool cumulants_factorize(const CumulantTable& kt, const std::string& label, int k_cap) {
    for (int k = 2; k <= k_cap; ++k) {
        Word w = constant_word(k, label);
        for (int k1 = 1; k1 < k; ++k1) {
            Word wa, wb;
            split_word(w, k1, wa, wb);
            for (const auto& p1 : enumerate_family(k1, kt.tag))
                for (const auto& p2 : enumerate_family(k - k1, kt.tag)) {
                    const Rational* lhs = kt.find(tensor(p1, p2), w);
                    const Rational* r1 = kt.find(p1, wa);
                    const Rational* r2 = kt.find(p2, wb);
                    if (!lhs || !r1 || !r2) continue;
                    if (*lhs != *r1 * *r2) return false;
                }
        }
    }
    return true;
}

std::string table_to_json(const TableData& t, const std::string& kind) {
    nlohmann::json j;
    j["kind"] = kind;
    j["family"] = family_name(t.tag);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [key, v] : t.entries()) {
        nlohmann::json e;
        e["k"] = key.p.k();
        e["partition"] = to_string(key.p);
        e["word"] = key.word;
        e["value"] = rat_str(v);
        arr.push_back(e);
    }
    j["entries"] = arr;
    return j.dump(2);
}

void table_from_json(const std::string& json_text, TableData& out, std::string* kind) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (kind) *kind = j.value("kind", "");
    out.tag = parse_family(j.value("family", "P"));
    for (const auto& e : j.at("entries")) {
        Partition p = parse_partition(e.at("partition").get<std::string>());
        if (e.at("k").get<int>() != p.k())
            throw std::invalid_argument("table json: k does not match partition");
        Word w = e.at("word").get<std::vector<std::string>>();
        out.set(p, w, parse_rational(e.at("value").get<std::string>()));
    }
}

}  // namespace palab
