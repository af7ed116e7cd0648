#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "palab/partition_algebra.hpp"

using namespace palab;

namespace {
Partition pp(const std::string& s) { return parse_partition(s); }
}

TEST_CASE("NPoly ring, evaluation and printing") {
    NPoly a = NPoly::n_power(-1, Rational(2)) + NPoly(1);
    CHECK(a.str() == "2*N^-1 + 1");
    CHECK(a.evaluate(4) == Rational(3, 2));

    NPoly b = NPoly::n_power(2) - NPoly::n_power(1, Rational(3));
    CHECK(b.str() == "-3*N + N^2");
    CHECK((a * b).evaluate(5) == a.evaluate(5) * b.evaluate(5));
    CHECK((a + b).evaluate(7) == a.evaluate(7) + b.evaluate(7));
    CHECK((a - a).is_zero());
    CHECK(NPoly().str() == "0");
}

TEST_CASE("mul: algebra product with N^kappa") {
    auto tr = Partition::transposition(2, 1, 2);
    auto w = Partition::weyl(2, 1, 2);

    auto x = mul(PartitionVector::basis(tr), PartitionVector::basis(tr));
    CHECK(x == PartitionVector::basis(Partition::identity(2)));

    auto y = mul(PartitionVector::basis(w), PartitionVector::basis(w));
    CHECK(y == PartitionVector::basis(w, NPoly::n_power(1)));

    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        auto v = PartitionVector::basis(p, NPoly::n_power(-2, Rational(3)));
        CHECK(mul(PartitionVector::basis(Partition::identity(2)), v) == v);
        CHECK(mul(v, PartitionVector::basis(Partition::identity(2))) == v);
    }

    // matrix-unit oracle: realize rho([1,2])^2 = N * rho([1,2]) at N = 2, 3
    for (long N : {2L, 3L}) {
        Eigen::MatrixXd R = rho_dense(w, N);
        CHECK((R * R - double(N) * R).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(mul(PartitionVector::basis(Partition::identity(1)),
                        PartitionVector::basis(Partition::identity(2))),
                    SizeMismatch);
}

TEST_CASE("gram_entry") {
    auto id2 = Partition::identity(2);
    auto tr = Partition::transposition(2, 1, 2);
    CHECK(gram_entry(id2, id2) == NPoly::n_power(2));
    CHECK(gram_entry(tr, id2) == NPoly::n_power(1));
    CHECK(gram_entry(tr, tr) == NPoly::n_power(2));
}

TEST_CASE("rho: identity, ones, traces") {
    CHECK(rho_dense(Partition::identity(1), 3).isApprox(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(rho_dense(Partition::singletons(1), 2).isApprox(Eigen::MatrixXd::Ones(2, 2)));

    for (long N : {2L, 3L})
        for (const auto& p : enumerate_family(2, FamilyTag::P))
            CHECK(rho_dense(p, N).trace() == doctest::Approx(std::pow(double(N), cycles(p))));

    set_rho_cap(100);
    CHECK_THROWS_AS(rho_dense(Partition::identity(4), 4), CapacityError);
    set_rho_cap(1000000);
}

TEST_CASE("representation property and Gram identity, k <= 2") {
    for (long N : {2L, 3L, 4L}) {
        for (int k = 1; k <= 2; ++k) {
            const auto& fam = enumerate_family(k, FamilyTag::P);
            std::vector<Eigen::MatrixXd> R;
            for (const auto& p : fam) R.push_back(rho_dense(p, N));
            for (size_t i = 0; i < fam.size(); ++i)
                for (size_t j = 0; j < fam.size(); ++j) {
                    auto comp = compose(fam[i], fam[j]);
                    Eigen::MatrixXd lhs = R[i] * R[j];
                    Eigen::MatrixXd rhs =
                        std::pow(double(N), comp.kappa) * rho_dense(comp.p, N);
                    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
                    // Gram identity
                    double tr = (R[i] * rho_dense(transpose(fam[j]), N)).trace();
                    CHECK(tr == std::pow(double(N), nc(join(fam[i], fam[j]))));
                }
        }
    }
}

TEST_CASE("tensor compatibility of rho") {
    for (long N : {2L, 3L}) {
        for (int k1 = 1; k1 <= 2; ++k1)
            for (const auto& p : enumerate_family(k1, FamilyTag::P))
                for (const auto& q : enumerate_family(3 - k1, FamilyTag::P)) {
                    Eigen::MatrixXd lhs = rho_dense(tensor(p, q), N);
                    Eigen::MatrixXd rhs =
                        Eigen::kroneckerProduct(rho_dense(p, N), rho_dense(q, N));
                    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
                }
    }
}

TEST_CASE("gram_solve: worked k=1 examples") {
    // E = Id_N at N = 4: traces t_{id} = Tr(rho(id)) = N, t_{1_1} = Tr(ones) = N.
    const long N = 4;
    std::map<Partition, Rational> traces_id = {{Partition::identity(1), Rational(N)},
                                               {Partition::singletons(1), Rational(N)}};
    auto c = gram_solve(1, FamilyTag::P, traces_id, N);
    CHECK(c[Partition::identity(1)] == 1);
    CHECK(c[Partition::singletons(1)] == 0);

    // E = J_N: t_{id} = Tr(J) = 1, t_{1_1} = sum of entries = N.
    std::map<Partition, Rational> traces_j = {{Partition::identity(1), Rational(1)},
                                              {Partition::singletons(1), Rational(N)}};
    auto cj = gram_solve(1, FamilyTag::P, traces_j, N);
    CHECK(cj[Partition::identity(1)] == 0);
    CHECK(cj[Partition::singletons(1)] == Rational(1, N));

    std::map<Partition, Rational> missing = {{Partition::identity(1), Rational(1)}};
    CHECK_THROWS_AS(gram_solve(1, FamilyTag::P, missing, N), std::invalid_argument);

    CHECK_THROWS_AS(gram_solve(1, FamilyTag::P, traces_id, 1), GramSingular);
}

TEST_CASE("gram_solve: lattice and Bareiss routes agree; re-synthesis") {
    std::mt19937 rng(11);
    auto random_rat = [&]() { return Rational(long(rng() % 19) - 9, long(rng() % 7) + 1); };

    for (int k = 1; k <= 2; ++k) {
        const long N = 6;
        const auto& fam = enumerate_family(k, FamilyTag::P);
        for (int trial = 0; trial < 5; ++trial) {
            std::map<Partition, Rational> traces;
            for (const auto& p : fam) {
                Rational r = random_rat();
                r.canonicalize();
                traces[p] = r;
            }
            auto via_lattice = gram_solve(k, FamilyTag::P, traces, N);

            // independent route: dense Bareiss on the same system
            std::vector<Rational> t;
            for (const auto& p : fam) t.push_back(traces.at(p));
            auto ncj = join_nc_table(fam);
            const size_t n = fam.size();
            // solve via rational Gaussian elimination (plain, independent code)
            std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n + 1));
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < n; ++j) M[i][j] = int_pow(N, ncj[i * n + j]);
                M[i][n] = t[i];
            }
            for (size_t col = 0; col < n; ++col) {
                size_t piv = col;
                while (M[piv][col] == 0) ++piv;
                std::swap(M[piv], M[col]);
                for (size_t r = 0; r < n; ++r) {
                    if (r == col || M[r][col] == 0) continue;
                    Rational f = M[r][col] / M[col][col];
                    for (size_t j = col; j <= n; ++j) M[r][j] -= f * M[col][j];
                }
            }
            for (size_t i = 0; i < n; ++i) {
                Rational xi = M[i][n] / M[i][i];
                xi.canonicalize();
                Rational li = via_lattice.at(fam[i]);
                li.canonicalize();
                CHECK(xi == li);
            }
        }
    }

    // re-synthesis: random coefficients -> traces -> solve recovers them (S family too)
    for (auto tag : {FamilyTag::P, FamilyTag::S, FamilyTag::B}) {
        const int k = 2;
        const long N = 5;
        const auto& fam = enumerate_family(k, tag);
        std::map<Partition, Rational> c0;
        for (const auto& p : fam) c0[p] = random_rat();
        std::map<Partition, Rational> traces;
        for (const auto& q : fam) {
            Rational s(0);
            for (const auto& p : fam) s += c0[p] * int_pow(N, nc(join(p, q)));
            traces[q] = s;
        }
        auto c = gram_solve(k, tag, traces, N);
        for (const auto& p : fam) {
            Rational a = c[p], b = c0[p];
            a.canonicalize();
            b.canonicalize();
            CHECK(a == b);
        }
    }
}

TEST_CASE("gram_solve_numeric matches exact solve") {
    const int k = 2;
    const long N = 6;
    const auto& fam = enumerate_family(k, FamilyTag::P);
    std::mt19937 rng(5);
    std::map<Partition, Rational> traces;
    std::map<Partition, double> dtraces;
    for (const auto& p : fam) {
        long v = long(rng() % 100);
        traces[p] = Rational(v, 4);
        dtraces[p] = double(v) / 4.0;
    }
    auto exact = gram_solve(k, FamilyTag::P, traces, N);
    auto num = gram_solve_numeric(k, FamilyTag::P, dtraces, N);
    for (const auto& p : fam)
        CHECK(num.at(p) == doctest::Approx(to_double(exact.at(p))).epsilon(1e-9));
}
