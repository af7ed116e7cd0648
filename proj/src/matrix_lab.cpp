#include "palab/matrix_lab.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "palab/processes.hpp"

namespace palab {

Estimate mc_run(long samples, uint64_t seed, int threads,
                const std::function<double(CounterRng&, long)>& fn) {
    auto v = mc_run_vector(samples, seed, threads, 1,
                           [&](CounterRng& rng, long i, std::vector<double>& out) {
                               out[0] = fn(rng, i);
                           });
    return v[0];
}

std::vector<Estimate> mc_run_vector(
    long samples, uint64_t seed, int threads, size_t dim,
    const std::function<void(CounterRng&, long, std::vector<double>&)>& fn) {
    threads = std::max(1, threads);
    std::vector<std::vector<Accumulator>> partial(threads, std::vector<Accumulator>(dim));
    auto worker = [&](int w) {
        std::vector<double> obs(dim);
        for (long i = w; i < samples; i += threads) {
            CounterRng rng = CounterRng::for_sample(seed, uint64_t(i));
            fn(rng, i, obs);
            for (size_t d = 0; d < dim; ++d) partial[w][d].add(obs[d]);
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    std::vector<Estimate> out(dim);
    for (size_t d = 0; d < dim; ++d) {
        Accumulator acc;
        for (int w = 0; w < threads; ++w) acc.merge(partial[w][d]);
        out[d] = acc.estimate();
    }
    return out;
}

namespace {
long g_budget = 500000000L;
}

long moment_budget() { return g_budget; }
void set_moment_budget(long b) { g_budget = b; }

QMatrix QMatrix::identity(long n) {
    QMatrix m(n);
    for (long i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

QMatrix QMatrix::jn(long n) {
    QMatrix m(n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m(i, j) = Rational(1, n);
    return m;
}

QMatrix QMatrix::diag(const std::vector<Rational>& d) {
    QMatrix m(static_cast<long>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(long(i), long(i)) = d[i];
    return m;
}

void SampleSpec::validate() const {
    if (N < 1) throw std::invalid_argument("SampleSpec: N must be >= 1");
    if (kind == "diag-iid") {
        if (atoms.empty()) throw std::invalid_argument("diag-iid: no atoms");
        for (auto& [x, w] : atoms)
            if (w < 0) throw std::invalid_argument("diag-iid: negative weight");
    } else if (kind == "const") {
        if (constant.rows() != N || constant.cols() != N)
            throw std::invalid_argument("const: matrix size != N");
    } else if (kind == "bm-additive" || kind == "bm-unitary") {
        if (beta != 1 && beta != 2) throw std::invalid_argument("field beta must be 1 or 2");
        if (kind == "bm-additive" && epsilon != 1 && epsilon != -1)
            throw std::invalid_argument("epsilon must be +-1");
        if (kind == "bm-unitary" && steps < 1) throw std::invalid_argument("steps must be >= 1");
    } else if (kind == "levy-additive" || kind == "levy-mult") {
        LevyTriplet::from_spec(*this).validate();
        if (kind == "levy-mult" && steps < 1) throw std::invalid_argument("steps must be >= 1");
    } else if (kind.rfind("haar:", 0) == 0) {
        std::string g = kind.substr(5);
        if (g != "U" && g != "O" && g != "S" && g != "H" && g != "B")
            throw std::invalid_argument("unsupported group " + g);
        if (g == "B" && N < 2) throw std::invalid_argument("haar:B needs N >= 2");
    } else if (kind != "gue" && kind != "goe" && kind != "antisym-gaussian" && kind != "jn") {
        throw std::invalid_argument("unknown sample kind: " + kind);
    }
}

// --- Haar samplers -------------------------------------------------------------

CMatrix haar_unitary(long N, CounterRng& rng) {
    CMatrix A(N, N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) A(i, j) = rng.cnormal();
    Eigen::HouseholderQR<CMatrix> qr(A);
    CMatrix Q = qr.householderQ() * CMatrix::Identity(N, N);
    Eigen::VectorXcd d = qr.matrixQR().diagonal();
    for (long j = 0; j < N; ++j) Q.col(j) *= d(j) / std::abs(d(j));
    return Q;
}

CMatrix haar_orthogonal(long N, CounterRng& rng) {
    Eigen::MatrixXd A(N, N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) A(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
    Eigen::VectorXd d = qr.matrixQR().diagonal();
    for (long j = 0; j < N; ++j)
        if (d(j) < 0) Q.col(j) = -Q.col(j);
    return Q.cast<std::complex<double>>();
}

CMatrix haar_permutation(long N, CounterRng& rng) {
    std::vector<long> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    for (long i = N - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    CMatrix M = CMatrix::Zero(N, N);
    for (long j = 0; j < N; ++j) M(perm[j], j) = 1.0;
    return M;
}

CMatrix haar_hyperoctahedral(long N, CounterRng& rng) {
    CMatrix M = haar_permutation(N, rng);
    for (long j = 0; j < N; ++j)
        if (rng.uniform() < 0.5) M.col(j) = -M.col(j);
    return M;
}

CMatrix haar_bistochastic(long N, CounterRng& rng) {
    // Haar O(N-1) block conjugated into the orthogonal complement of the
    // normalized all-ones vector; rows and columns then sum to 1.
    Eigen::VectorXd u = Eigen::VectorXd::Constant(N, 1.0 / std::sqrt(double(N)));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    v(0) = 1.0;
    v -= u;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(N, N);
    double vn = v.squaredNorm();
    if (vn > 1e-14) H -= (2.0 / vn) * (v * v.transpose());
    Eigen::MatrixXd V = H.rightCols(N - 1);  // orthonormal basis of 1^perp
    Eigen::MatrixXd Q = haar_orthogonal(N - 1, rng).real();
    Eigen::MatrixXd B = Eigen::MatrixXd::Constant(N, N, 1.0 / double(N)) + V * Q * V.transpose();
    return B.cast<std::complex<double>>();
}

CMatrix haar_sample(const std::string& group, long N, CounterRng& rng) {
    if (group == "U") return haar_unitary(N, rng);
    if (group == "O") return haar_orthogonal(N, rng);
    if (group == "S") return haar_permutation(N, rng);
    if (group == "H") return haar_hyperoctahedral(N, rng);
    if (group == "B") return haar_bistochastic(N, rng);
    throw std::invalid_argument("unsupported group " + group);
}

CMatrix additive_bm_sample(long N, double t, int epsilon, int beta, CounterRng& rng) {
    const double s = std::sqrt(t / double(N)) * M_SQRT1_2;
    if (beta == 2) {
        CMatrix A(N, N);
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j) A(i, j) = rng.cnormal();
        CMatrix H = s * (A + A.adjoint());
        return epsilon == 1 ? H : CMatrix(std::complex<double>(0, 1) * H);
    }
    Eigen::MatrixXd B(N, N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) B(i, j) = rng.normal();
    Eigen::MatrixXd S = epsilon == 1 ? Eigen::MatrixXd(s * (B + B.transpose()))
                                     : Eigen::MatrixXd(s * (B - B.transpose()));
    return S.cast<std::complex<double>>();
}

CMatrix sample_matrix(const SampleSpec& spec, long index) {
    spec.validate();
    CounterRng rng = CounterRng::for_sample(spec.seed, uint64_t(index));
    const long N = spec.N;
    if (spec.kind == "gue") return additive_bm_sample(N, spec.t, 1, 2, rng);
    if (spec.kind == "goe") return additive_bm_sample(N, spec.t, 1, 1, rng);
    if (spec.kind == "antisym-gaussian") return additive_bm_sample(N, spec.t, -1, 1, rng);
    if (spec.kind.rfind("haar:", 0) == 0) return haar_sample(spec.kind.substr(5), N, rng);
    if (spec.kind == "jn") return CMatrix::Constant(N, N, 1.0 / double(N));
    if (spec.kind == "const") return spec.constant;
    if (spec.kind == "diag-iid") {
        double total = 0;
        for (auto& [x, w] : spec.atoms) total += w;
        CMatrix M = CMatrix::Zero(N, N);
        for (long i = 0; i < N; ++i) {
            double u = rng.uniform() * total, acc = 0, val = spec.atoms.back().first;
            for (auto& [x, w] : spec.atoms) {
                acc += w;
                if (u < acc) {
                    val = x;
                    break;
                }
            }
            M(i, i) = val;
        }
        return M;
    }
    if (spec.kind == "bm-additive")
        return additive_bm_sample(N, spec.t, spec.epsilon, spec.beta, rng);
    return sample_process(spec, index);  // bm-unitary, levy-additive, levy-mult
}

// --- p-moments by cycle-factorized block sums ----------------------------------

namespace {

struct MomentPlan {
    int k = 0;
    std::vector<int> lab;  // block label per point of tp
    struct Cycle {
        std::vector<int> blocks;
        std::vector<int> columns;  // 1-based
    };
    std::vector<Cycle> cycles;
};

MomentPlan plan_moment(const Partition& p, long N, long budget, const char* what) {
    MomentPlan plan;
    const Partition tp = transpose(p);
    plan.k = p.k();
    plan.lab = tp.labels();
    auto cyc = cycle_sets(tp);
    double cost = 0;
    for (const auto& c : cyc) {
        MomentPlan::Cycle pc;
        std::vector<char> seen_block(tp.nc(), 0);
        for (Point x : c) {
            if (!seen_block[plan.lab[x]]) {
                seen_block[plan.lab[x]] = 1;
                pc.blocks.push_back(plan.lab[x]);
            }
            if (!point_primed(x)) pc.columns.push_back(point_col(x));
        }
        cost += std::pow(double(N), double(pc.blocks.size())) * double(plan.k);
        plan.cycles.push_back(std::move(pc));
    }
    if (cost > double(budget))
        throw BudgetExceeded(std::string(what) + ": predicted cost exceeds budget " +
                             std::to_string(budget));
    return plan;
}

template <typename Scalar, typename Entry>
Scalar p_moment_impl(const Partition& p, long N, Entry entry, const Scalar& unit) {
    MomentPlan plan = plan_moment(p, N, moment_budget(), "p_moment");
    Scalar total = unit;
    std::vector<long> value(plan.lab.size(), 0);
    for (const auto& c : plan.cycles) {
        const int nb = static_cast<int>(c.blocks.size());
        std::vector<long> assign(nb, 0);
        Scalar cycle_sum = unit - unit;  // zero of the scalar type
        while (true) {
            for (int i = 0; i < nb; ++i) value[c.blocks[i]] = assign[i];
            Scalar prod = unit;
            for (int col : c.columns) {
                long a = value[plan.lab[make_point(col, false)]];
                long b = value[plan.lab[make_point(col, true)]];
                prod = prod * entry(col, a, b);
            }
            cycle_sum += prod;
            int i = nb - 1;
            for (; i >= 0; --i) {
                if (++assign[i] < N) break;
                assign[i] = 0;
            }
            if (i < 0) break;
        }
        total = total * cycle_sum;
    }
    return total;
}

}  // namespace

Rational p_moment_exact(const std::vector<const QMatrix*>& ms, const Partition& p) {
    if (static_cast<int>(ms.size()) != p.k()) throw SizeMismatch("p_moment: word length != k");
    if (p.k() == 0) return Rational(1);
    const long N = ms[0]->n();
    for (auto* m : ms)
        if (m->n() != N) throw SizeMismatch("p_moment: matrices of different sizes");
    Rational s = p_moment_impl<Rational>(
        p, N, [&](int col, long a, long b) -> Rational { return (*ms[col - 1])(a, b); },
        Rational(1));
    return s / int_pow(N, cycles(p));
}

std::complex<double> p_moment_numeric(const std::vector<const CMatrix*>& ms, const Partition& p) {
    if (static_cast<int>(ms.size()) != p.k()) throw SizeMismatch("p_moment: word length != k");
    if (p.k() == 0) return 1.0;
    const long N = ms[0]->rows();
    for (auto* m : ms)
        if (m->rows() != N || m->cols() != N)
            throw SizeMismatch("p_moment: matrices of different sizes");
    std::complex<double> s = p_moment_impl<std::complex<double>>(
        p, N,
        [&](int col, long a, long b) -> std::complex<double> { return (*ms[col - 1])(a, b); },
        std::complex<double>(1.0, 0.0));
    return s / std::pow(double(N), double(cycles(p)));
}

Rational exclusive_moment_exact(const std::vector<const QMatrix*>& ms, const Partition& p) {
    if (static_cast<int>(ms.size()) != p.k()) throw SizeMismatch("exclusive_moment: word length");
    if (p.k() == 0) return Rational(1);
    const long N = ms[0]->n();
    const Partition tp = transpose(p);
    const int nb = tp.nc();
    if (nb > N) throw std::invalid_argument("exclusive_moment: nc(p) > N");
    if (to_double(falling(N, nb)) * double(p.k()) > double(moment_budget()))
        throw BudgetExceeded("exclusive_moment: predicted cost exceeds budget");
    const auto lab = tp.labels();

    // a column's factor becomes computable when the later of its blocks gets a value
    std::vector<std::vector<int>> finalize(nb);
    for (int col = 1; col <= p.k(); ++col) {
        int b1 = lab[make_point(col, false)], b2 = lab[make_point(col, true)];
        finalize[std::max(b1, b2)].push_back(col);
    }
    std::vector<long> value(nb, -1);
    std::vector<char> used(N, 0);
    Rational total(0);
    auto rec = [&](auto&& self, int b, const Rational& partial) -> void {
        if (b == nb) {
            total += partial;
            return;
        }
        for (long v = 0; v < N; ++v) {
            if (used[v]) continue;
            used[v] = 1;
            value[b] = v;
            Rational next = partial;
            for (int col : finalize[b])
                next *= (*ms[col - 1])(value[lab[make_point(col, false)]],
                                       value[lab[make_point(col, true)]]);
            if (next != 0) self(self, b + 1, next);
            used[v] = 0;
        }
    };
    rec(rec, 0, Rational(1));
    return total / int_pow(N, cycles(p));
}

// --- finite-dimensional cumulants ----------------------------------------------
//
// No Haar averaging is performed to obtain the trace pairings: for p' in A_k,
// rho(tp') commutes with the tensor action of G(A)(N), so by cyclicity
// Tr[g^{(x)k} T g*^{(x)k} rho(tp')] = Tr[T rho(tp') g*^{(x)k} g^{(x)k}] = Tr[T rho(tp')],
// and the group integral drops out of every pairing the solve consumes.

namespace {
template <typename T, typename Pow>
std::map<Partition, T> cumulants_from_traces(const std::map<Partition, T>& moments, int k,
                                             FamilyTag tag, long N, Pow powN) {
    std::map<Partition, T> traces;
    for (const auto& [p, m] : moments) traces[p] = m * powN(cycles(p));
    std::map<Partition, T> c;
    if constexpr (std::is_same_v<T, Rational>)
        c = gram_solve(k, tag, traces, N);
    else
        c = gram_solve_numeric(k, tag, traces, N);
    std::map<Partition, T> kappa;
    for (const auto& [p, cp] : c) kappa[p] = cp * powN(p.nc() - cycles(p));
    return kappa;
}
}  // namespace

std::map<Partition, Rational> finite_cumulants_exact(const std::vector<const QMatrix*>& ms, int k,
                                                     FamilyTag tag, long N) {
    std::map<Partition, Rational> moments;
    for (const auto& p : enumerate_family(k, tag)) moments[p] = p_moment_exact(ms, p);
    return finite_cumulants_from_moments_exact(moments, k, tag, N);
}

std::map<Partition, Rational> finite_cumulants_from_moments_exact(
    const std::map<Partition, Rational>& mean_moments, int k, FamilyTag tag, long N) {
    return cumulants_from_traces<Rational>(mean_moments, k, tag, N,
                                           [&](int e) { return int_pow(N, e); });
}

std::map<Partition, double> finite_cumulants_from_moments(
    const std::map<Partition, double>& mean_moments, int k, FamilyTag tag, long N) {
    return cumulants_from_traces<double>(mean_moments, k, tag, N,
                                         [&](int e) { return std::pow(double(N), e); });
}

std::map<Partition, Rational> finite_moments_from_cumulants(
    const std::map<Partition, Rational>& kappa, int k, FamilyTag tag, long N) {
    const auto& items = enumerate_family(k, tag);
    std::map<Partition, Rational> out;
    for (const auto& q : items) {
        Rational t(0);
        for (const auto& p : items) {
            auto it = kappa.find(p);
            if (it == kappa.end()) throw MissingEntry("missing cumulant for " + to_string(p));
            // c_p = kappa_p N^{-(nc-cyc)}; t_q = sum_p c_p N^{nc(p v q)}
            t += it->second * int_pow(N, nc(join(p, q)) - (p.nc() - cycles(p)));
        }
        out[q] = t / int_pow(N, cycles(q));
    }
    return out;
}

Rational entry_moment_prediction(const std::map<Partition, Rational>& kappa, FamilyTag tag,
                                 const std::vector<long>& tuple, long N) {
    Partition ker = kernel(tuple);
    Rational s(0);
    for (const auto& [p, v] : kappa) {
        if (!family_member(p, tag)) continue;
        if (!is_finer(p, ker)) continue;
        s += v * int_pow(N, -(p.nc() - cycles(p)));
    }
    return s;
}

double entry_moment_prediction_numeric(const std::map<Partition, double>& kappa, FamilyTag tag,
                                       const std::vector<long>& tuple, long N) {
    Partition ker = kernel(tuple);
    double s = 0;
    for (const auto& [p, v] : kappa) {
        if (!family_member(p, tag)) continue;
        if (!is_finer(p, ker)) continue;
        s += v * std::pow(double(N), -double(p.nc() - cycles(p)));
    }
    return s;
}

// --- diagnostics -----------------------------------------------------------------

std::map<Partition, double> strong_invariance_diagnostic(const SampleSpec& spec, int k,
                                                         long samples, int threads,
                                                         long tuple_cap) {
    const long N = spec.N;
    std::map<Partition, double> out;
    for (const auto& p : enumerate_family(k, FamilyTag::P)) {
        const int nb = p.nc();
        if (nb > N) continue;
        if (to_double(falling(N, nb)) > double(tuple_cap))
            throw CapacityError("strong_invariance_diagnostic: kernel class " + to_string(p) +
                                " has too many index tuples");
        // all index tuples with kernel exactly p (injective block assignments)
        const auto lab = p.labels();
        std::vector<std::vector<long>> tuples;
        std::vector<long> value(nb, -1);
        std::vector<char> used(N, 0);
        auto rec = [&](auto&& self, int b) -> void {
            if (b == nb) {
                std::vector<long> tup(2 * k);
                for (int x = 0; x < 2 * k; ++x) tup[x] = value[lab[x]];
                tuples.push_back(std::move(tup));
                return;
            }
            for (long v = 0; v < N; ++v) {
                if (used[v]) continue;
                used[v] = 1;
                value[b] = v;
                self(self, b + 1);
                used[v] = 0;
            }
        };
        rec(rec, 0);

        const size_t T = tuples.size();
        auto est = mc_run_vector(samples, spec.seed, threads, 2 * T,
                                 [&](CounterRng& rng, long idx, std::vector<double>& obs) {
                                     (void)rng;
                                     CMatrix M = sample_matrix(spec, idx);
                                     for (size_t ti = 0; ti < T; ++ti) {
                                         std::complex<double> prod(1, 0);
                                         for (int col = 1; col <= k; ++col)
                                             prod *= M(tuples[ti][2 * (col - 1)],
                                                       tuples[ti][2 * (col - 1) + 1]);
                                         obs[2 * ti] = prod.real();
                                         obs[2 * ti + 1] = prod.imag();
                                     }
                                 });
        double sup = 0;
        for (size_t a = 0; a < T; ++a)
            for (size_t b = a + 1; b < T; ++b) {
                double dr = est[2 * a].mean - est[2 * b].mean;
                double di = est[2 * a + 1].mean - est[2 * b + 1].mean;
                sup = std::max(sup, std::hypot(dr, di));
            }
        out[p] = sup * std::pow(double(N), p.nc() - cycles(p));
    }
    return out;
}

// --- classical bridge --------------------------------------------------------------

Rational classical_cumulant(const std::vector<Rational>& moments, int k) {
    if (k < 1 || k > static_cast<int>(moments.size()))
        throw std::invalid_argument("classical_cumulant: need the first k moments");
    // cum_n = m_n - sum_{j=1}^{n-1} C(n-1, j-1) cum_j m_{n-j}
    std::vector<Rational> cum(k + 1);
    for (int n = 1; n <= k; ++n) {
        Rational s = moments[n - 1];
        for (int j = 1; j < n; ++j) {
            Rational binom(1);
            for (int i = 0; i < j - 1; ++i) binom = binom * Rational(n - 1 - i) / Rational(i + 1);
            s -= binom * cum[j] * moments[n - j - 1];
        }
        cum[n] = s;
    }
    return cum[k];
}

Rational diag_family_mean_moment(const std::vector<Rational>& moments, const Partition& p,
                                 long N) {
    if (p.k() == 0) return Rational(1);
    auto cyc = cycle_sets(p);
    const int m = static_cast<int>(cyc.size());
    std::vector<int> cols_per_cycle(m);
    for (int i = 0; i < m; ++i) {
        int c = 0;
        for (Point x : cyc[i])
            if (!point_primed(x)) ++c;
        cols_per_cycle[i] = c;
    }
    // sum over set partitions of the cycles: (N)_{|pi|} prod_G m_{#columns(G)}
    Rational total(0);
    std::vector<std::vector<int>> groups;
    auto rec = [&](auto&& self, int next) -> void {
        if (next == m) {
            Rational term = falling(N, static_cast<long>(groups.size()));
            for (const auto& g : groups) {
                int cols = 0;
                for (int ci : g) cols += cols_per_cycle[ci];
                if (cols > static_cast<int>(moments.size()))
                    throw std::invalid_argument("diag_family_mean_moment: not enough moments");
                term *= moments[cols - 1];
                if (term == 0) break;
            }
            total += term;
            return;
        }
        const size_t g = groups.size();
        for (size_t i = 0; i < g; ++i) {
            groups[i].push_back(next);
            self(self, next + 1);
            groups[i].pop_back();
        }
        groups.push_back({next});
        self(self, next + 1);
        groups.pop_back();
    };
    rec(rec, 0);
    return total / int_pow(N, m);
}

// --- matrix file formats -------------------------------------------------------

namespace {
std::string complex_str(std::complex<double> z) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g%s%.17gi", z.real(), z.imag() < 0 ? "-" : "+",
                  std::abs(z.imag()));
    return buf;
}

std::complex<double> parse_complex(const std::string& s) {
    // forms: "a+bi", "a-bi"; the split sign is the last +/- not part of an exponent
    if (s.empty() || s.back() != 'i') throw std::invalid_argument("bad complex entry: " + s);
    size_t split = std::string::npos;
    for (size_t i = s.size() - 1; i > 0; --i) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) throw std::invalid_argument("bad complex entry: " + s);
    double re = std::stod(s.substr(0, split));
    double im = std::stod(s.substr(split, s.size() - 1 - split));
    return {re, im};
}
}  // namespace

std::string matrix_to_csv(const CMatrix& m) {
    std::string out;
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (j) out += ",";
            out += complex_str(m(i, j));
        }
        out += "\n";
    }
    return out;
}

CMatrix matrix_from_csv(const std::string& text) {
    std::vector<std::vector<std::complex<double>>> rows;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        std::vector<std::complex<double>> row;
        size_t start = 0;
        while (start <= line.size()) {
            size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            row.push_back(parse_complex(line.substr(start, comma - start)));
            start = comma + 1;
            if (comma == line.size()) break;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty matrix csv");
    const long n = static_cast<long>(rows.size());
    CMatrix m(n, n);
    for (long i = 0; i < n; ++i) {
        if (static_cast<long>(rows[i].size()) != n)
            throw std::invalid_argument("matrix csv is not square");
        for (long j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<uint8_t> matrix_to_palb(const CMatrix& m) {
    std::vector<uint8_t> out;
    auto push = [&](const void* p, size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    };
    out.insert(out.end(), {'P', 'A', 'L', 'B'});
    uint32_t version = 1;
    push(&version, 4);
    uint64_t N = uint64_t(m.rows());
    push(&N, 8);
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) {
            double re = m(i, j).real(), im = m(i, j).imag();
            push(&re, 8);
            push(&im, 8);
        }
    return out;
}

CMatrix matrix_from_palb(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 16 || bytes[0] != 'P' || bytes[1] != 'A' || bytes[2] != 'L' ||
        bytes[3] != 'B')
        throw std::invalid_argument("not a PALB matrix file");
    uint32_t version;
    std::memcpy(&version, bytes.data() + 4, 4);
    if (version != 1) throw std::invalid_argument("unsupported PALB version");
    uint64_t N;
    std::memcpy(&N, bytes.data() + 8, 8);
    if (bytes.size() != 16 + N * N * 16) throw std::invalid_argument("truncated PALB file");
    CMatrix m(static_cast<long>(N), static_cast<long>(N));
    size_t off = 16;
    for (uint64_t i = 0; i < N; ++i)
        for (uint64_t j = 0; j < N; ++j) {
            double re, im;
            std::memcpy(&re, bytes.data() + off, 8);
            std::memcpy(&im, bytes.data() + off + 8, 8);
            m(long(i), long(j)) = {re, im};
            off += 16;
        }
    return m;
}

Rational classical_bridge(const std::vector<Rational>& moments, int k, long l) {
    if (l < k) throw std::invalid_argument("classical_bridge: l must be >= k");
    // The expected tensor is diagonal, so it lies in the span of the diagonal
    // family D_k (partitions coarser than id_k), where rho_l is injective for
    // l >= k already; solve the Gram system on that sublattice.
    std::vector<Partition> dk = coarsenings(Partition::identity(k));
    std::sort(dk.begin(), dk.end());
    std::map<Partition, Rational> traces;
    for (const auto& p : dk)
        traces[p] = diag_family_mean_moment(moments, p, l) * int_pow(l, cycles(p));
    auto c = gram_solve_on(dk, traces, l);
    // kappa_p = c_p N^{nc - cycles}; for 0_k both are 1
    return c.at(Partition::zero(k));
}

}  // namespace palab
