#include "palab/partition_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace palab {

PartitionVector add(const PartitionVector& x, const PartitionVector& y) {
    if (!x.terms.empty() && !y.terms.empty() && x.k != y.k)
        throw SizeMismatch("add: size mismatch");
    PartitionVector r = x;
    if (r.terms.empty()) r.k = y.k;
    for (const auto& [p, c] : y.terms) r.add_term(p, c);
    return r;
}

PartitionVector scale(const PartitionVector& x, const NPoly& s) {
    PartitionVector r;
    r.k = x.k;
    if (s.is_zero()) return r;
    for (const auto& [p, c] : x.terms) r.terms[p] = c * s;
    return r;
}

PartitionVector mul(const PartitionVector& x, const PartitionVector& y) {
    if (x.k != y.k) throw SizeMismatch("mul: size mismatch");
    PartitionVector r;
    r.k = x.k;
    for (const auto& [p, cp] : x.terms)
        for (const auto& [q, cq] : y.terms) {
            auto comp = compose(p, q);
            r.add_term(comp.p, cp * cq * NPoly::n_power(comp.kappa));
        }
    return r;
}

NPoly gram_entry(const Partition& p, const Partition& q) {
    if (p.k() != q.k()) throw SizeMismatch("gram_entry: size mismatch");
    return NPoly::n_power(nc(join(p, q)));
}

namespace {
long g_rho_cap = 1000000;

long checked_pow(long N, int k, long cap) {
    long v = 1;
    for (int i = 0; i < k; ++i) {
        if (v > cap / N) return cap + 1;
        v *= N;
    }
    return v;
}
}  // namespace

long rho_cap() { return g_rho_cap; }
void set_rho_cap(long cap) { g_rho_cap = cap; }

std::vector<std::pair<long, long>> rho_entries(const Partition& p, long N) {
    const int k = p.k();
    if (N < 1) throw std::invalid_argument("rho: N must be >= 1");
    if (checked_pow(N, k, g_rho_cap) > g_rho_cap)
        throw CapacityError("rho: N^k exceeds cap " + std::to_string(g_rho_cap));
    if (checked_pow(N, p.nc(), 100 * g_rho_cap) > 100 * g_rho_cap)
        throw CapacityError("rho: N^nc(p) entry count exceeds cap");

    const auto lab = p.labels();
    const int nb = p.nc();
    std::vector<long> assign(nb, 0);
    std::vector<std::pair<long, long>> out;
    while (true) {
        long row = 0, col = 0;
        for (int c = 1; c <= k; ++c) {
            col = col * N + assign[lab[make_point(c, false)]];
            row = row * N + assign[lab[make_point(c, true)]];
        }
        out.emplace_back(row, col);
        int i = nb - 1;
        for (; i >= 0; --i) {
            if (++assign[i] < N) break;
            assign[i] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

Eigen::MatrixXd rho_dense(const Partition& p, long N) {
    const long dim = checked_pow(N, p.k(), g_rho_cap);
    if (dim > g_rho_cap) throw CapacityError("rho_dense: dimension exceeds cap");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    for (auto [r, c] : rho_entries(p, N)) M(r, c) = 1.0;
    return M;
}

Eigen::MatrixXd realize_dense(const PartitionVector& v, long N) {
    const long dim = checked_pow(N, v.k, g_rho_cap);
    if (dim > g_rho_cap) throw CapacityError("realize_dense: dimension exceeds cap");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [p, coeff] : v.terms) {
        const double c = to_double(coeff.evaluate(N));
        for (auto [r, col] : rho_entries(p, N)) M(r, col) += c;
    }
    return M;
}

std::vector<Partition> coarsenings(const Partition& p) {
    const int nb = p.nc();
    std::vector<Partition> out;
    // Set partitions of p's blocks, by recursive placement.
    std::vector<std::vector<int>> groups;
    auto rec = [&](auto&& self, int next) -> void {
        if (next == nb) {
            std::vector<std::vector<Point>> blocks;
            blocks.reserve(groups.size());
            for (const auto& g : groups) {
                std::vector<Point> merged;
                for (int b : g)
                    merged.insert(merged.end(), p.blocks()[b].begin(), p.blocks()[b].end());
                blocks.push_back(std::move(merged));
            }
            out.push_back(Partition::of(p.k(), std::move(blocks)));
            return;
        }
        const size_t m = groups.size();
        for (size_t i = 0; i < m; ++i) {
            groups[i].push_back(next);
            self(self, next + 1);
            groups[i].pop_back();
        }
        groups.push_back({next});
        self(self, next + 1);
        groups.pop_back();
    };
    rec(rec, 0);
    return out;
}

namespace {

template <typename T>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static Rational from_power(long N, int e) { return int_pow(N, e); }
    static Rational falling_fact(long N, int m) { return falling(N, m); }
    static bool is_zero(const Rational& x) { return x == 0; }
    static Rational abs_val(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

template <>
struct ScalarOps<double> {
    static double from_power(long N, int e) { return std::pow(double(N), e); }
    static double falling_fact(long N, int m) {
        double acc = 1;
        for (int i = 0; i < m; ++i) acc *= double(N - i);
        return acc;
    }
    static bool is_zero(double x) { return x == 0.0; }
    static double abs_val(double x) { return std::fabs(x); }
};

// Lattice-factorized solve for tag = P: the Gram matrix is Z D Z^T with Z the
// refinement zeta matrix and D = diag of falling factorials (N)_{nc(r)}, so
// the solve is two triangular Mobius inversions plus a diagonal division.
template <typename T>
std::vector<T> gram_solve_lattice(int k, const std::vector<T>& t, long N) {
    const auto& items = enumerate_family(k, FamilyTag::P);
    const size_t n = items.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return items[a].nc() < items[b].nc(); });

    std::vector<std::vector<int>> strict_coarser(n);
    for (size_t i = 0; i < n; ++i)
        for (const auto& r : coarsenings(items[i])) {
            int j = family_index(k, FamilyTag::P, r);
            if (j != static_cast<int>(i)) strict_coarser[i].push_back(j);
        }

    // Z u = t, coarsest first.
    std::vector<T> u(n, T(0));
    for (int i : order) {
        T s = t[i];
        for (int j : strict_coarser[i]) s -= u[j];
        u[i] = s;
    }
    // Diagonal division; a zero falling factorial means rho_N is not
    // injective (N < 2k) and the Gram matrix is singular.
    for (size_t i = 0; i < n; ++i) {
        T f = ScalarOps<T>::falling_fact(N, items[i].nc());
        if (ScalarOps<T>::is_zero(f))
            throw GramSingular("gram_solve: N too small for family P at k=" + std::to_string(k));
        u[i] = u[i] / f;
    }
    // Z^T c = u, finest first; push each solved c into its strict coarsenings.
    std::vector<T> c(n, T(0)), acc(n, T(0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int i = *it;
        c[i] = u[i] - acc[i];
        for (int j : strict_coarser[i]) acc[j] += c[i];
    }
    return c;
}

// Fraction-free (Bareiss) elimination on the augmented Gram system.
template <typename T>
std::vector<T> gram_solve_bareiss(const std::vector<Partition>& items, const std::vector<T>& t,
                                  long N, const char* famname, int k) {
    const size_t n = items.size();
    auto ncj = join_nc_table(items);
    std::vector<std::vector<T>> M(n, std::vector<T>(n + 1));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) M[i][j] = ScalarOps<T>::from_power(N, ncj[i * n + j]);
        M[i][n] = t[i];
    }
    T prev = T(1);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = n;
        if constexpr (std::is_same_v<T, double>) {
            piv = col;
            for (size_t r = col + 1; r < n; ++r)
                if (ScalarOps<T>::abs_val(M[r][col]) > ScalarOps<T>::abs_val(M[piv][col])) piv = r;
            if (ScalarOps<T>::abs_val(M[piv][col]) < 1e-300) piv = n;
        } else {
            for (size_t r = col; r < n; ++r)
                if (!ScalarOps<T>::is_zero(M[r][col])) {
                    piv = r;
                    break;
                }
        }
        if (piv >= n)
            throw GramSingular(std::string("gram_solve: N too small for family ") + famname +
                               " at k=" + std::to_string(k));
        if (piv != col) std::swap(M[piv], M[col]);
        const T pivot = M[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            for (size_t j = col + 1; j <= n; ++j)
                M[r][j] = (M[r][j] * pivot - M[r][col] * M[col][j]) / prev;
            M[r][col] = T(0);
        }
        prev = pivot;
    }
    std::vector<T> x(n);
    for (size_t i = n; i-- > 0;) {
        T s = M[i][n];
        for (size_t j = i + 1; j < n; ++j) s -= M[i][j] * x[j];
        if (ScalarOps<T>::is_zero(M[i][i]))
            throw GramSingular(std::string("gram_solve: N too small for family ") + famname +
                               " at k=" + std::to_string(k));
        x[i] = s / M[i][i];
    }
    return x;
}

template <typename T>
std::map<Partition, T> gram_solve_impl(int k, FamilyTag tag,
                                       const std::map<Partition, T>& traces, long N) {
    const auto& items = enumerate_family(k, tag);
    std::vector<T> t(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        auto it = traces.find(items[i]);
        if (it == traces.end())
            throw std::invalid_argument("gram_solve: missing trace for " + to_string(items[i]));
        t[i] = it->second;
    }
    std::vector<T> c = tag == FamilyTag::P
                           ? gram_solve_lattice<T>(k, t, N)
                           : gram_solve_bareiss<T>(items, t, N, family_name(tag), k);
    std::map<Partition, T> out;
    for (size_t i = 0; i < items.size(); ++i) out[items[i]] = c[i];
    return out;
}

}  // namespace

std::map<Partition, Rational> gram_solve(int k, FamilyTag tag,
                                         const std::map<Partition, Rational>& traces, long N) {
    return gram_solve_impl<Rational>(k, tag, traces, N);
}

std::map<Partition, Rational> gram_solve_on(const std::vector<Partition>& items,
                                            const std::map<Partition, Rational>& traces, long N) {
    const size_t n = items.size();
    std::map<Partition, int> index;
    for (size_t i = 0; i < n; ++i) index[items[i]] = static_cast<int>(i);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return items[a].nc() < items[b].nc(); });

    std::vector<std::vector<int>> strict_coarser(n);
    std::vector<Rational> t(n);
    for (size_t i = 0; i < n; ++i) {
        auto it = traces.find(items[i]);
        if (it == traces.end())
            throw std::invalid_argument("gram_solve_on: missing trace for " + to_string(items[i]));
        t[i] = it->second;
        for (const auto& r : coarsenings(items[i])) {
            auto jt = index.find(r);
            if (jt == index.end())
                throw std::invalid_argument("gram_solve_on: item list not coarsening-closed");
            if (jt->second != static_cast<int>(i)) strict_coarser[i].push_back(jt->second);
        }
    }
    std::vector<Rational> u(n, Rational(0));
    for (int i : order) {
        Rational s = t[i];
        for (int j : strict_coarser[i]) s -= u[j];
        u[i] = s;
    }
    for (size_t i = 0; i < n; ++i) {
        Rational f = falling(N, items[i].nc());
        if (f == 0) throw GramSingular("gram_solve_on: N too small for the sublattice");
        u[i] = u[i] / f;
    }
    std::vector<Rational> c(n, Rational(0)), acc(n, Rational(0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int i = *it;
        c[i] = u[i] - acc[i];
        for (int j : strict_coarser[i]) acc[j] += c[i];
    }
    std::map<Partition, Rational> out;
    for (size_t i = 0; i < n; ++i) out[items[i]] = c[i];
    return out;
}

std::map<Partition, double> gram_solve_numeric(int k, FamilyTag tag,
                                               const std::map<Partition, double>& traces, long N) {
    return gram_solve_impl<double>(k, tag, traces, N);
}

}  // namespace palab
