#include "palab/processes.hpp"

#include <algorithm>
#include <cmath>

namespace palab {

void LevyTriplet::validate() const {
    if (diffusion < 0) throw std::invalid_argument("LevyTriplet: diffusion must be >= 0");
    for (auto& [x, w] : atoms) {
        if (w < 0) throw std::invalid_argument("LevyTriplet: negative jump weight");
        if (x == 0) throw std::invalid_argument("LevyTriplet: atom at the group identity");
        if (multiplicative && (x < -M_PI || x > M_PI))
            throw std::invalid_argument("LevyTriplet: angle outside [-pi, pi]");
    }
}

LevyTriplet LevyTriplet::from_spec(const SampleSpec& spec) {
    LevyTriplet t;
    t.multiplicative = spec.kind == "levy-mult";
    t.drift = spec.drift;
    t.diffusion = spec.diffusion;
    t.atoms = spec.jump_atoms;
    return t;
}

double LevyTriplet::total_jump_mass() const {
    double s = 0;
    for (auto& [x, w] : atoms) s += w;
    return s;
}

int PairingTwoSpecies::t_count() const {
    int c = 0;
    for (bool w : weyl)
        if (!w) ++c;
    return c;
}

Partition PairingTwoSpecies::brauer(int n) const {
    std::vector<std::vector<Point>> blocks;
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [a, b] = pairs[i];
        if (weyl[i]) {
            blocks.push_back({make_point(a, false), make_point(b, false)});
            blocks.push_back({make_point(a, true), make_point(b, true)});
        } else {
            blocks.push_back({make_point(a, false), make_point(b, true)});
            blocks.push_back({make_point(a, true), make_point(b, false)});
        }
    }
    return Partition::of(n, std::move(blocks));
}

namespace {

void gen_matchings(std::vector<int>& rest, std::vector<std::pair<int, int>>& cur,
                   std::vector<std::vector<std::pair<int, int>>>& out) {
    if (rest.empty()) {
        out.push_back(cur);
        return;
    }
    int a = rest.front();
    for (size_t i = 1; i < rest.size(); ++i) {
        int b = rest[i];
        std::vector<int> next;
        for (size_t j = 1; j < rest.size(); ++j)
            if (j != i) next.push_back(rest[j]);
        cur.emplace_back(a, b);
        gen_matchings(next, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<PairingTwoSpecies> pairings(int k, int beta) {
    std::vector<PairingTwoSpecies> out;
    if (k % 2 != 0) return out;  // no perfect matching of an odd set
    std::vector<int> pts(k);
    for (int i = 0; i < k; ++i) pts[i] = i + 1;
    std::vector<std::vector<std::pair<int, int>>> matchings;
    std::vector<std::pair<int, int>> cur;
    gen_matchings(pts, cur, matchings);
    const int np = k / 2;
    for (const auto& m : matchings) {
        if (beta == 2) {
            PairingTwoSpecies p;
            p.pairs = m;
            p.weyl.assign(np, false);
            out.push_back(std::move(p));
        } else {
            for (uint32_t mask = 0; mask < (uint32_t(1) << np); ++mask) {
                PairingTwoSpecies p;
                p.pairs = m;
                p.weyl.resize(np);
                for (int i = 0; i < np; ++i) p.weyl[i] = (mask >> i) & 1;
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

PartitionVector wick_tensor(int k, int epsilon, int beta,
                            const std::vector<std::vector<Rational>>& covariance) {
    if (static_cast<int>(covariance.size()) != k)
        throw SizeMismatch("wick_tensor: covariance must be k x k");
    for (auto& row : covariance) {
        if (static_cast<int>(row.size()) != k)
            throw SizeMismatch("wick_tensor: covariance must be k x k");
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (covariance[i][j] != covariance[j][i])
                throw std::invalid_argument("wick_tensor: covariance not symmetric");
    PartitionVector out;
    out.k = k;
    for (const auto& pi : pairings(k, beta)) {
        Rational coeff = epsilon == 1 ? Rational(1)
                                      : (pi.t_count() % 2 ? Rational(-1) : Rational(1));
        for (auto [i, j] : pi.pairs) coeff *= covariance[i - 1][j - 1];
        if (coeff != 0) out.add_term(pi.brauer(k), NPoly(coeff));
    }
    return out;
}

// --- process samplers ----------------------------------------------------------

namespace {

// exp of the skew-hermitian H via the hermitian eigendecomposition of -iH
CMatrix exp_skew(const CMatrix& H) {
    const long N = H.rows();
    CMatrix K = std::complex<double>(0, -1) * H;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(K);
    Eigen::VectorXcd phase(N);
    for (long i = 0; i < N; ++i)
        phase(i) = std::exp(std::complex<double>(0, es.eigenvalues()(i)));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

long sample_poisson(double lambda, CounterRng& rng) {
    long total = 0;
    while (lambda > 300) {
        // split a large rate into manageable chunks
        total += sample_poisson(300, rng);
        lambda -= 300;
    }
    double limit = std::exp(-lambda), prod = rng.uniform();
    long count = 0;
    while (prod > limit) {
        ++count;
        prod *= rng.uniform();
    }
    return total + count;
}

CMatrix unitary_bm_endpoint(long N, double t, int beta, int steps, CounterRng& rng) {
    CMatrix U = CMatrix::Identity(N, N);
    const double dt = t / steps;
    for (int s = 0; s < steps; ++s) {
        CMatrix dH;
        if (beta == 2) {
            dH = std::complex<double>(0, 1) * additive_bm_sample(N, dt, 1, 2, rng);
        } else {
            dH = additive_bm_sample(N, dt, -1, 1, rng);  // skew-symmetric real
        }
        U = exp_skew(dH) * U;
    }
    return U;
}

CMatrix additive_levy_endpoint(const SampleSpec& spec, CounterRng& rng) {
    const long N = spec.N;
    const LevyTriplet tr = LevyTriplet::from_spec(spec);
    const double t = spec.t;
    CMatrix X = tr.drift * t * CMatrix::Identity(N, N);
    if (tr.diffusion > 0) X += std::sqrt(tr.diffusion) * additive_bm_sample(N, t, 1, spec.beta, rng);
    const double mass = tr.total_jump_mass();
    if (mass > 0) {
        long jumps = sample_poisson(double(N) * mass * t, rng);
        double mean_jump = 0;  // compensator: int x rho(dx)
        for (auto& [x, w] : tr.atoms) mean_jump += x * w;
        for (long j = 0; j < jumps; ++j) {
            // pick an atom by weight
            double u = rng.uniform() * mass, acc = 0, x = tr.atoms.back().first;
            for (auto& [loc, w] : tr.atoms) {
                acc += w;
                if (u < acc) {
                    x = loc;
                    break;
                }
            }
            // g x E_11 g* = x u u* with u the first column of a Haar matrix
            Eigen::VectorXcd v(N);
            if (spec.beta == 2) {
                for (long i = 0; i < N; ++i) v(i) = rng.cnormal();
            } else {
                for (long i = 0; i < N; ++i) v(i) = rng.normal();
            }
            v.normalize();
            X += x * (v * v.adjoint());
        }
        X -= mean_jump * t * CMatrix::Identity(N, N);
    }
    return X;
}

CMatrix multiplicative_levy_endpoint(const SampleSpec& spec, CounterRng& rng) {
    const long N = spec.N;
    const LevyTriplet tr = LevyTriplet::from_spec(spec);
    const double t = spec.t;
    const double dt = t / spec.steps;
    const double mass = tr.total_jump_mass();
    // compensator of the jump part: - int A(g) nu_N = -i (int sin theta nu) Id
    double sin_comp = 0;
    for (auto& [theta, w] : tr.atoms) sin_comp += std::sin(theta) * w;

    CMatrix U = CMatrix::Identity(N, N);
    for (int s = 0; s < spec.steps; ++s) {
        CMatrix dH = CMatrix::Zero(N, N);
        if (tr.diffusion > 0) {
            if (spec.beta == 2)
                dH = std::sqrt(tr.diffusion) * std::complex<double>(0, 1) *
                     additive_bm_sample(N, dt, 1, 2, rng);
            else
                dH = std::sqrt(tr.diffusion) * additive_bm_sample(N, dt, -1, 1, rng);
        }
        if (spec.beta == 2)
            dH += std::complex<double>(0, (tr.drift - sin_comp) * dt) * CMatrix::Identity(N, N);
        U = exp_skew(dH) * U;

        // jumps inside this step
        long jumps = mass > 0 ? sample_poisson(double(N) * mass * dt, rng) : 0;
        for (long j = 0; j < jumps; ++j) {
            double u = rng.uniform() * mass, acc = 0, theta = tr.atoms.back().first;
            for (auto& [loc, w] : tr.atoms) {
                acc += w;
                if (u < acc) {
                    theta = loc;
                    break;
                }
            }
            if (spec.beta == 2) {
                // V = Id + (e^{i theta} - 1) u u*
                Eigen::VectorXcd v(N);
                for (long i = 0; i < N; ++i) v(i) = rng.cnormal();
                v.normalize();
                std::complex<double> z = std::exp(std::complex<double>(0, theta)) - 1.0;
                U += z * (v * (v.adjoint() * U));
            } else {
                // rotation by theta in a random 2-plane
                Eigen::VectorXd a(N), b(N);
                for (long i = 0; i < N; ++i) a(i) = rng.normal();
                for (long i = 0; i < N; ++i) b(i) = rng.normal();
                a.normalize();
                b -= a.dot(b) * a;
                b.normalize();
                Eigen::VectorXcd u1 = a.cast<std::complex<double>>(),
                                 u2 = b.cast<std::complex<double>>();
                double c = std::cos(theta) - 1, sn = std::sin(theta);
                CMatrix rot = c * (u1 * u1.adjoint() + u2 * u2.adjoint()) +
                              sn * (u2 * u1.adjoint() - u1 * u2.adjoint());
                U += rot * U;
            }
        }
    }
    return U;
}

}  // namespace

CMatrix sample_process(const SampleSpec& spec, long index) {
    CounterRng rng = CounterRng::for_sample(spec.seed, uint64_t(index));
    if (spec.kind == "bm-unitary")
        return unitary_bm_endpoint(spec.N, spec.t, spec.beta, spec.steps, rng);
    if (spec.kind == "levy-additive") return additive_levy_endpoint(spec, rng);
    if (spec.kind == "levy-mult") return multiplicative_levy_endpoint(spec, rng);
    throw std::invalid_argument("sample_process: unknown kind " + spec.kind);
}

// --- generator transforms ---------------------------------------------------------

SpectralForm generator_additive_bm(int epsilon, int beta) {
    SpectralForm f;
    f.is_infinitesimal_character = true;
    f.set_class(Partition::transposition(2, 1, 2), Rational(epsilon));
    f.set_class(Partition::weyl(2, 1, 2), Rational(2 - beta));
    return f;
}

SpectralFormD generator_unitary_bm(int beta, int k_max) {
    SpectralFormD f;
    f.is_infinitesimal_character = true;
    for (int k = 1; k <= k_max; ++k) {
        f.set_class(Partition::identity(k), -double(k) / 2.0);
        if (k >= 2) {
            f.set_class(tensor(Partition::transposition(2, 1, 2), Partition::identity(k - 2)),
                        -1.0);
            if (beta == 1)
                f.set_class(tensor(Partition::weyl(2, 1, 2), Partition::identity(k - 2)), 1.0);
        }
    }
    return f;
}

SpectralForm generator_additive_levy(const Rational& eta, const Rational& a,
                                     const std::vector<std::pair<Rational, Rational>>& atoms,
                                     int k_max) {
    SpectralForm f;
    f.is_infinitesimal_character = true;
    for (int k = 1; k <= k_max; ++k) {
        Rational moment(0);
        for (auto& [x, w] : atoms) moment += w * rat_pow(x, k);
        Rational v = k == 1 ? eta : (k == 2 ? a + moment : moment);
        f.set_class(Partition::full_cycle(k), v);
    }
    return f;
}

SpectralFormD generator_multiplicative_levy(const LevyTriplet& triplet, int k_max) {
    triplet.validate();
    if (!triplet.multiplicative)
        throw std::invalid_argument("generator_multiplicative_levy: additive triplet");
    SpectralFormD f;
    f.is_infinitesimal_character = true;
    // L_1 = i arg(omega) - b/2 + int (Re z - 1) nu; the exact lane keeps only
    // the real part, so arg(omega) must vanish.
    if (triplet.drift != 0)
        throw std::invalid_argument("generator_multiplicative_levy: arg(omega) must be 0");
    double l1 = -triplet.diffusion / 2.0;
    for (auto& [theta, w] : triplet.atoms) l1 += (std::cos(theta) - 1.0) * w;
    auto lm = [&](int m) {
        // int (z - 1)^m nu over the symmetrized measure: real part survives
        double s = 0;
        for (auto& [theta, w] : triplet.atoms) {
            std::complex<double> z = std::exp(std::complex<double>(0, theta)) - 1.0;
            s += w * std::pow(z, m).real();
        }
        if (m == 2) s -= triplet.diffusion;
        return s;
    };
    for (int k = 1; k <= k_max; ++k) {
        f.set_class(Partition::identity(k), double(k) * l1);
        for (int m = 2; m <= k; ++m) {
            Partition cl = m == k ? Partition::full_cycle(m)
                                  : tensor(Partition::full_cycle(m), Partition::identity(k - m));
            f.set_class(cl, lm(m));
        }
    }
    return f;
}

SpectralForm generator_spectral_form(const SampleSpec& spec, int k_max) {
    if (spec.kind == "bm-additive") return generator_additive_bm(spec.epsilon, spec.beta);
    if (spec.kind == "levy-additive") {
        // the exact lane rationalizes the double parameters (dyadic grid)
        auto to_rat = [](double x) {
            Rational r(long(std::lround(x * 1048576)), 1048576L);
            r.canonicalize();
            return r;
        };
        std::vector<std::pair<Rational, Rational>> atoms;
        for (auto& [x, w] : spec.jump_atoms) atoms.emplace_back(to_rat(x), to_rat(w));
        return generator_additive_levy(to_rat(spec.drift), to_rat(spec.diffusion), atoms, k_max);
    }
    throw std::invalid_argument("generator_spectral_form: no exact form for " + spec.kind);
}

SpectralFormD generator_spectral_form_numeric(const SampleSpec& spec, int k_max) {
    if (spec.kind == "bm-unitary") return generator_unitary_bm(spec.beta, k_max);
    if (spec.kind == "levy-mult")
        return generator_multiplicative_levy(LevyTriplet::from_spec(spec), k_max);
    return to_numeric(generator_spectral_form(spec, k_max));
}

// --- Gaussian approximants ----------------------------------------------------------

CMatrix gaussian_approximant(const Partition& p2_class, long N, double t, CounterRng& rng) {
    if (p2_class.k() != 2) throw std::invalid_argument("gaussian_approximant: class must be in P_2");
    const Partition rep = orbit_rep(p2_class);
    const double s = std::sqrt(t);
    auto B = [&]() { return s * rng.normal(); };

    auto is = [&](const char* str) { return rep == orbit_rep(parse_partition(str)); };

    if (is("{1 1'}{2 2'}")) return B() * CMatrix::Identity(N, N);  // id_2
    if (is("{1 2 1' 2'}")) {                                      // 0_2
        CMatrix M = CMatrix::Zero(N, N);
        for (long i = 0; i < N; ++i) M(i, i) = B();
        return M;
    }
    if (is("{1}{1'}{2}{2'}"))  // 1_2
        return B() * CMatrix::Constant(N, N, 1.0 / double(N));
    if (is("{1 2}{1' 2'}")) {  // [1,2]: iid real entries / sqrt(N)
        CMatrix M(N, N);
        const double c = 1.0 / std::sqrt(double(N));
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j) M(i, j) = c * B();
        return M;
    }
    if (is("{1 2'}{2 1'}"))  // (1,2): hermitian BM
        return additive_bm_sample(N, t, 1, 2, rng);
    if (is("{1 2}{1'}{2'}")) {  // column-constant
        CMatrix M(N, N);
        for (long j = 0; j < N; ++j) {
            double bj = B();
            for (long i = 0; i < N; ++i) M(i, j) = bj / double(N);
        }
        return M;
    }
    if (is("{1}{2}{1' 2'}")) {  // row-constant
        CMatrix M(N, N);
        for (long i = 0; i < N; ++i) {
            double bi = B();
            for (long j = 0; j < N; ++j) M(i, j) = bi / double(N);
        }
        return M;
    }
    if (is("{1 2'}{2}{1'}")) {
        std::vector<double> b1(N), b2(N), b3(N);
        for (long i = 0; i < N; ++i) {
            b1[i] = B();
            b2[i] = B();
            b3[i] = B();
        }
        CMatrix M(N, N);
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j)
                M(i, j) = std::complex<double>(b1[i] + b1[j], -(b2[i] + b3[j])) / double(N);
        return M;
    }
    if (is("{1 2 2'}{1'}")) {
        std::vector<double> b1(N), b2(N);
        for (long i = 0; i < N; ++i) {
            b1[i] = B();
            b2[i] = B();
        }
        CMatrix M(N, N);
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j) {
                std::complex<double> v(b1[j] / double(N), 0);
                if (i == j) v += std::complex<double>(b1[i], -b2[i]);
                M(i, j) = v;
            }
        return M;
    }
    if (is("{1}{2 1' 2'}")) {
        // transpose of the previous construction
        std::vector<double> b1(N), b2(N);
        for (long i = 0; i < N; ++i) {
            b1[i] = B();
            b2[i] = B();
        }
        CMatrix M(N, N);
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j) {
                std::complex<double> v(b1[i] / double(N), 0);
                if (i == j) v += std::complex<double>(b1[i], -b2[i]);
                M(i, j) = v;
            }
        return M;
    }
    if (is("{1 1'}{2}{2'}")) {
        double b1 = B(), b2 = B(), b3 = B();
        CMatrix M = std::complex<double>(b1, -b2) * CMatrix::Identity(N, N);
        M += std::complex<double>(b1, -b3) * CMatrix::Constant(N, N, 1.0 / double(N));
        return M;
    }
    throw std::invalid_argument("gaussian_approximant: unknown class " + to_string(p2_class));
}

// --- reference moments ----------------------------------------------------------------

long catalan(int n) {
    long c = 1;
    for (int i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
    return c;
}

Rational semicircle_moment(int k) {
    if (k % 2) return Rational(0);
    return Rational(catalan(k / 2));
}

double unitary_bm_moment(int k, double t) {
    // e^{-kt/2} sum_{l=0}^{k-1} (-t)^l / l! k^{l-1} C(k, l+1)
    double sum = 0, fact = 1;
    for (int l = 0; l <= k - 1; ++l) {
        if (l > 0) fact *= l;
        double binom = 1;
        for (int i = 0; i < l + 1; ++i) binom = binom * double(k - i) / double(i + 1);
        sum += std::pow(-t, l) / fact * std::pow(double(k), l - 1) * binom;
    }
    return std::exp(-double(k) * t / 2.0) * sum;
}

std::vector<std::vector<std::vector<int>>> noncrossing_partitions(int k) {
    std::vector<std::vector<std::vector<int>>> all;
    std::vector<std::vector<int>> blocks;
    auto rec = [&](auto&& self, int next) -> void {
        if (next == k) {
            all.push_back(blocks);
            return;
        }
        const size_t m = blocks.size();
        for (size_t i = 0; i < m; ++i) {
            blocks[i].push_back(next);
            self(self, next + 1);
            blocks[i].pop_back();
        }
        blocks.push_back({next});
        self(self, next + 1);
        blocks.pop_back();
    };
    rec(rec, 0);
    std::vector<std::vector<std::vector<int>>> out;
    for (const auto& part : all) {
        // crossing: a < b < c < d with {a,c} and {b,d} in different blocks
        std::vector<int> owner(k, -1);
        for (size_t b = 0; b < part.size(); ++b)
            for (int x : part[b]) owner[x] = static_cast<int>(b);
        bool crossing = false;
        for (int a = 0; a < k && !crossing; ++a)
            for (int b = a + 1; b < k && !crossing; ++b)
                for (int c = b + 1; c < k && !crossing; ++c)
                    for (int d = c + 1; d < k && !crossing; ++d)
                        if (owner[a] == owner[c] && owner[b] == owner[d] && owner[a] != owner[b])
                            crossing = true;
        if (!crossing) out.push_back(part);
    }
    return out;
}

Rational free_poisson_moment(const Rational& lambda, int k) {
    Rational s(0);
    for (const auto& part : noncrossing_partitions(k))
        s += rat_pow(lambda, static_cast<long>(part.size()));
    return s;
}

}  // namespace palab
