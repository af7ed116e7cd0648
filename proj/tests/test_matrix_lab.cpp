#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "palab/matrix_lab.hpp"
#include "palab/processes.hpp"

using namespace palab;

namespace {

QMatrix random_int_matrix(long N, std::mt19937& rng) {
    QMatrix m(N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) m(i, j) = Rational(long(rng() % 11) - 5);
    return m;
}

// independent oracle: N^{-cycles} Tr[(M_1 (x) ... (x) M_k) rho(tp)] from the
// dense sparse-entry representation
Rational tensor_trace_oracle(const std::vector<const QMatrix*>& ms, const Partition& p) {
    const long N = ms[0]->n();
    const int k = p.k();
    Rational tr(0);
    for (auto [row, col] : rho_entries(transpose(p), N)) {
        // decompose multi-indices, most significant first
        Rational prod(1);
        long r = row, c = col;
        std::vector<long> rd(k), cd(k);
        for (int j = k - 1; j >= 0; --j) {
            rd[j] = r % N;
            r /= N;
            cd[j] = c % N;
            c /= N;
        }
        for (int j = 0; j < k; ++j) prod *= (*ms[j])(cd[j], rd[j]);
        tr += prod;
    }
    return tr / int_pow(N, cycles(p));
}

}  // namespace

TEST_CASE("p_moment: spec examples") {
    const long N = 4;
    QMatrix id = QMatrix::identity(N);
    std::vector<const QMatrix*> one = {&id};
    CHECK(p_moment_exact(one, Partition::identity(1)) == 1);

    QMatrix d(2);
    d(0, 0) = 1;
    d(1, 1) = 2;
    std::vector<const QMatrix*> dd = {&d, &d};
    CHECK(p_moment_exact(dd, Partition::transposition(2, 1, 2)) == Rational(5, 2));

    // m_{[1,2]}(M, M) = (1/N) sum_{a,b} M_{ab}^2
    std::mt19937 rng(5);
    QMatrix M = random_int_matrix(3, rng);
    std::vector<const QMatrix*> mm = {&M, &M};
    Rational expect(0);
    for (long a = 0; a < 3; ++a)
        for (long b = 0; b < 3; ++b) expect += M(a, b) * M(a, b);
    CHECK(p_moment_exact(mm, Partition::weyl(2, 1, 2)) == expect / 3);
}

TEST_CASE("p_moment equals the dense tensor-trace oracle on P_2, P_3") {
    std::mt19937 rng(7);
    for (long N : {2L, 3L}) {
        QMatrix A = random_int_matrix(N, rng), B = random_int_matrix(N, rng),
                C = random_int_matrix(N, rng);
        std::vector<const QMatrix*> two = {&A, &B}, three = {&A, &B, &C};
        for (const auto& p : enumerate_family(2, FamilyTag::P))
            CHECK(p_moment_exact(two, p) == tensor_trace_oracle(two, p));
        for (const auto& p : enumerate_family(3, FamilyTag::P))
            CHECK(p_moment_exact(three, p) == tensor_trace_oracle(three, p));
    }
}

TEST_CASE("m_sigma is the product of normalized traces along cycles") {
    std::mt19937 rng(9);
    const long N = 3;
    QMatrix A = random_int_matrix(N, rng), B = random_int_matrix(N, rng),
            C = random_int_matrix(N, rng);
    std::vector<const QMatrix*> ms = {&A, &B, &C};
    // sigma = (1,2,3): m = Tr(ABC)/N
    Rational tr(0);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j)
            for (long l = 0; l < N; ++l) tr += A(i, j) * B(j, l) * C(l, i);
    CHECK(p_moment_exact(ms, Partition::full_cycle(3)) == tr / N);

    // sigma = (1,2)(3): product of two normalized traces
    Rational t2(0), t1(0);
    for (long i = 0; i < N; ++i) {
        t1 += C(i, i);
        for (long j = 0; j < N; ++j) t2 += A(i, j) * B(j, i);
    }
    auto sigma = tensor(Partition::transposition(2, 1, 2), Partition::identity(1));
    CHECK(p_moment_exact(ms, sigma) == (t2 / N) * (t1 / N));
}

TEST_CASE("exclusive moments at finite N") {
    const long N = 4;
    QMatrix id = QMatrix::identity(N);
    std::vector<const QMatrix*> one = {&id};
    CHECK(exclusive_moment_exact(one, Partition::singletons(1)) == 0);
    CHECK(exclusive_moment_exact(one, Partition::identity(1)) == 1);

    // consistency at N = 3: m_{1_1} = m_{1_1^c} + m_{id_1^c}
    std::mt19937 rng(11);
    QMatrix M = random_int_matrix(3, rng);
    std::vector<const QMatrix*> mv = {&M};
    CHECK(p_moment_exact(mv, Partition::singletons(1)) ==
          exclusive_moment_exact(mv, Partition::singletons(1)) +
              exclusive_moment_exact(mv, Partition::identity(1)));

    // exact finite-N identity on all of P_2 (N = 5 so every nc(p) <= N):
    // m_p = sum_{p' coarser} N^{cycles(p') - cycles(p)} m_{p'^c}
    QMatrix A = random_int_matrix(5, rng), B = random_int_matrix(5, rng);
    std::vector<const QMatrix*> two = {&A, &B};
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        Rational rhs(0);
        for (const auto& q : enumerate_family(2, FamilyTag::P)) {
            if (!is_finer(p, q)) continue;  // q coarser than p
            rhs += int_pow(5, cycles(q) - cycles(p)) * exclusive_moment_exact(two, q);
        }
        CHECK(p_moment_exact(two, p) == rhs);
    }

    // refusal when nc(p) exceeds N
    QMatrix small = QMatrix::identity(2);
    std::vector<const QMatrix*> sv = {&small, &small};
    CHECK_THROWS_AS(exclusive_moment_exact(sv, Partition::singletons(2)), std::invalid_argument);
}

TEST_CASE("finite_cumulants: Id, J_N and GUE-mean examples") {
    const long N = 4;
    QMatrix id = QMatrix::identity(N);
    std::vector<const QMatrix*> one = {&id};
    auto k_id = finite_cumulants_exact(one, 1, FamilyTag::P, N);
    CHECK(k_id.at(Partition::identity(1)) == 1);
    CHECK(k_id.at(Partition::singletons(1)) == 0);

    QMatrix j = QMatrix::jn(N);
    std::vector<const QMatrix*> jv = {&j};
    auto k_j = finite_cumulants_exact(jv, 1, FamilyTag::P, N);
    CHECK(k_j.at(Partition::identity(1)) == 0);
    CHECK(k_j.at(Partition::singletons(1)) == 1);

    // GUE mean tensor at k=2: E[H (x) H] = rho((1,2))/N exactly; feed the
    // exact mean moments through the cumulant extraction.
    std::map<Partition, Rational> mm;
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        // m_p of the mean tensor: N^{-cyc} Tr(rho((1,2)) rho(tp)) / N
        Rational tr = int_pow(N, nc(join(Partition::transposition(2, 1, 2), transpose(p))));
        mm[p] = tr / int_pow(N, cycles(p) + 1);
    }
    auto kg = finite_cumulants_from_moments_exact(mm, 2, FamilyTag::P, N);
    for (const auto& [p, v] : kg)
        CHECK(v == (p == Partition::transposition(2, 1, 2) ? Rational(1) : Rational(0)));
}

TEST_CASE("finite-N synthesis inverts finite_cumulants exactly") {
    std::mt19937 rng(13);
    const long N = 5;
    QMatrix A = random_int_matrix(N, rng), B = random_int_matrix(N, rng);
    std::vector<const QMatrix*> two = {&A, &B};
    std::map<Partition, Rational> moments;
    for (const auto& p : enumerate_family(2, FamilyTag::P)) moments[p] = p_moment_exact(two, p);
    auto kappa = finite_cumulants_from_moments_exact(moments, 2, FamilyTag::P, N);
    auto back = finite_moments_from_cumulants(kappa, 2, FamilyTag::P, N);
    for (const auto& [p, m] : moments) CHECK(back.at(p) == m);
}

TEST_CASE("entry_moment_prediction") {
    const long N = 4;
    QMatrix j = QMatrix::jn(N);
    std::vector<const QMatrix*> jv = {&j};
    auto kj = finite_cumulants_exact(jv, 1, FamilyTag::P, N);
    CHECK(entry_moment_prediction(kj, FamilyTag::P, {1, 1}, N) == Rational(1, N));
    CHECK(entry_moment_prediction(kj, FamilyTag::P, {1, 2}, N) == Rational(1, N));

    QMatrix id = QMatrix::identity(N);
    std::vector<const QMatrix*> iv = {&id};
    auto ki = finite_cumulants_exact(iv, 1, FamilyTag::P, N);
    CHECK(entry_moment_prediction(ki, FamilyTag::P, {1, 1}, N) == 1);
    CHECK(entry_moment_prediction(ki, FamilyTag::P, {1, 2}, N) == 0);

    // S-supported cumulants + unbalanced kernel: prediction vanishes
    std::map<Partition, Rational> ks = {{Partition::identity(2), Rational(2)},
                                        {Partition::transposition(2, 1, 2), Rational(3)}};
    CHECK(entry_moment_prediction(ks, FamilyTag::S, {1, 1, 1, 2}, N) == 0);

    // prediction vs direct entry product for a polynomial in Id and J_N:
    // M = 2 Id + 3 J: exactly S(N)-invariant and deterministic
    QMatrix M(N);
    for (long i = 0; i < N; ++i)
        for (long j2 = 0; j2 < N; ++j2) M(i, j2) = (i == j2 ? Rational(2) : Rational(0)) + Rational(3, N);
    std::vector<const QMatrix*> mv = {&M, &M};
    auto km = finite_cumulants_exact(mv, 2, FamilyTag::P, N);
    for (std::vector<long> tup : {std::vector<long>{1, 1, 1, 1}, {1, 2, 2, 1}, {1, 2, 3, 1},
                                  {1, 1, 2, 2}, {2, 3, 3, 2}}) {
        Rational actual = M(tup[0] - 1, tup[1] - 1) * M(tup[2] - 1, tup[3] - 1);
        CHECK(entry_moment_prediction(km, FamilyTag::P, tup, N) == actual);
    }
}

TEST_CASE("haar samplers satisfy the group constraints") {
    CounterRng rng(99);
    const long N = 8;

    CMatrix U = haar_unitary(N, rng);
    CHECK((U * U.adjoint() - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);

    CMatrix O = haar_orthogonal(N, rng);
    CHECK((O * O.transpose() - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(O.imag().cwiseAbs().maxCoeff() == 0.0);

    CMatrix S = haar_permutation(N, rng);
    for (long j = 0; j < N; ++j) {
        CHECK(S.col(j).cwiseAbs().sum() == 1.0);
        CHECK(S.row(j).cwiseAbs().sum() == 1.0);
    }

    CMatrix H = haar_hyperoctahedral(N, rng);
    CHECK((H * H.adjoint() - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
    for (long j = 0; j < N; ++j) CHECK(H.col(j).cwiseAbs().sum() == 1.0);

    CMatrix Bm = haar_bistochastic(N, rng);
    CHECK((Bm * Bm.adjoint() - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-11);
    for (long j = 0; j < N; ++j) {
        CHECK(std::abs(Bm.col(j).sum() - 1.0) < 1e-12);
        CHECK(std::abs(Bm.row(j).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("sample streams are deterministic in (spec, index)") {
    SampleSpec spec;
    spec.kind = "gue";
    spec.N = 6;
    spec.seed = 42;
    CMatrix a = sample_matrix(spec, 3), b = sample_matrix(spec, 3);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CMatrix c = sample_matrix(spec, 4);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

    // estimates merge order-independently: 1 vs 2 threads give identical sums
    auto e1 = mc_run(64, 7, 1, [&](CounterRng&, long i) {
        return sample_matrix(spec, i).real().trace();
    });
    auto e2 = mc_run(64, 7, 2, [&](CounterRng&, long i) {
        return sample_matrix(spec, i).real().trace();
    });
    CHECK(e1.mean == doctest::Approx(e2.mean).epsilon(1e-15));
    CHECK(e1.samples == e2.samples);
}

TEST_CASE("gue/goe second moments match the Casimir form") {
    // E[M (x) M] entrywise ~ rho((1,2))/N (+ rho([1,2])/N for goe), MC check
    const long N = 4;
    const long samples = 20000;
    for (const char* kind : {"gue", "goe"}) {
        SampleSpec spec;
        spec.kind = kind;
        spec.N = N;
        spec.seed = 5;
        const bool goe = std::string(kind) == "goe";
        Eigen::MatrixXd expect = rho_dense(Partition::transposition(2, 1, 2), N);
        if (goe) expect += rho_dense(Partition::weyl(2, 1, 2), N);
        expect /= double(N);

        const long D = N * N;
        auto est = mc_run_vector(samples, spec.seed, 2, size_t(D * D),
                                 [&](CounterRng&, long i, std::vector<double>& obs) {
                                     CMatrix M = sample_matrix(spec, i);
                                     for (long r = 0; r < D; ++r)
                                         for (long c = 0; c < D; ++c) {
                                             std::complex<double> v = M(r / N, c / N) * M(r % N, c % N);
                                             obs[r * D + c] = v.real();
                                         }
                                 });
        double worst = 0;
        for (long r = 0; r < D; ++r)
            for (long c = 0; c < D; ++c) {
                double dev = std::abs(est[r * D + c].mean - expect(r, c));
                double tol = 6 * est[r * D + c].stderr_ + 1e-9;
                worst = std::max(worst, dev - tol);
            }
        CHECK(worst <= 0);
    }
}

TEST_CASE("strong invariance diagnostic") {
    // exactly S-invariant: permutation-conjugated diagonal -> all classes ~ 0
    const long N = 6;
    SampleSpec inv;
    inv.kind = "diag-iid";
    inv.N = N;
    inv.seed = 3;
    inv.atoms = {{0.0, 0.5}, {1.0, 0.5}};
    auto d1 = strong_invariance_diagnostic(inv, 1, 4000, 2);
    for (const auto& [p, v] : d1) CHECK(v < 0.1);

    // fixed half/half diagonal: the diagonal class has discrepancy 1
    CMatrix D = CMatrix::Zero(N, N);
    for (long i = N / 2; i < N; ++i) D(i, i) = 1.0;
    SampleSpec fixed;
    fixed.kind = "const";
    fixed.N = N;
    fixed.seed = 1;
    fixed.constant = D;
    auto d2 = strong_invariance_diagnostic(fixed, 1, 8, 1);
    CHECK(d2.at(Partition::identity(1)) == doctest::Approx(1.0));

    // constant scalar matrix: 0 everywhere
    SampleSpec scal;
    scal.kind = "const";
    scal.N = N;
    scal.seed = 1;
    scal.constant = 2.5 * CMatrix::Identity(N, N);
    auto d3 = strong_invariance_diagnostic(scal, 1, 8, 1);
    for (const auto& [p, v] : d3) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("classical cumulants and the bridge") {
    // Bernoulli(1/2): moments all 1/2
    std::vector<Rational> mom(4, Rational(1, 2));
    CHECK(classical_cumulant(mom, 1) == Rational(1, 2));
    CHECK(classical_cumulant(mom, 2) == Rational(1, 4));
    CHECK(classical_cumulant(mom, 3) == 0);
    CHECK(classical_cumulant(mom, 4) == Rational(-1, 8));

    for (int k = 1; k <= 3; ++k) {
        CHECK(classical_bridge(mom, k, 4) == classical_cumulant(mom, k));
        CHECK(classical_bridge(mom, k, 6) == classical_cumulant(mom, k));
    }

    // constant law: cum_k = 0 for k >= 2
    std::vector<Rational> cst = {Rational(3), Rational(9), Rational(27)};
    CHECK(classical_bridge(cst, 2, 4) == 0);
    CHECK(classical_bridge(cst, 3, 4) == 0);

    CHECK_THROWS_AS(classical_bridge(mom, 3, 2), std::invalid_argument);
}

TEST_CASE("matrix file formats round-trip bit-exactly") {
    CounterRng rng(61);
    const long N = 5;
    CMatrix M(N, N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) M(i, j) = rng.cnormal() * 3.0;
    M(0, 1) = {-1.25e-3, 0.0};
    M(2, 3) = {0.0, -7.0};

    CMatrix a = matrix_from_csv(matrix_to_csv(M));
    CHECK((a - M).cwiseAbs().maxCoeff() == 0.0);

    CMatrix b = matrix_from_palb(matrix_to_palb(M));
    CHECK((b - M).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(matrix_from_palb({1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(matrix_from_csv("1+0i,2+0i\n"), std::invalid_argument);
}

TEST_CASE("estimate merge is associative on the (sum, sumsq, n) triple") {
    Accumulator a, b, c;
    for (int i = 0; i < 10; ++i) a.add(0.1 * i);
    for (int i = 0; i < 7; ++i) b.add(-0.3 * i);
    for (int i = 0; i < 5; ++i) c.add(1.0 + i);
    Accumulator ab = a;
    ab.merge(b);
    Accumulator ab_c = ab;
    ab_c.merge(c);
    Accumulator bc = b;
    bc.merge(c);
    Accumulator a_bc = a;
    a_bc.merge(bc);
    CHECK(ab_c.sum == doctest::Approx(a_bc.sum).epsilon(1e-15));
    CHECK(ab_c.sumsq == doctest::Approx(a_bc.sumsq).epsilon(1e-15));
    CHECK(ab_c.n == a_bc.n);
}

TEST_CASE("budget guardrail") {
    long saved = moment_budget();
    set_moment_budget(10);
    std::mt19937 rng(1);
    QMatrix A = random_int_matrix(4, rng);
    std::vector<const QMatrix*> two = {&A, &A};
    CHECK_THROWS_AS(p_moment_exact(two, Partition::singletons(2)), BudgetExceeded);
    set_moment_budget(saved);
}
