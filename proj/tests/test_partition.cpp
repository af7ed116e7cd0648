#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "palab/partition.hpp"

using namespace palab;

namespace {

// Independent brute-force set-partition generator (recursive block placement,
// unrelated to the library's RGS scan). Oracle for enumeration counts.
void gen_partitions(int n, int next, std::vector<std::vector<int>>& blocks,
                    std::vector<std::vector<std::vector<int>>>& out) {
    if (next == n) {
        out.push_back(blocks);
        return;
    }
    const size_t m = blocks.size();
    for (size_t i = 0; i < m; ++i) {
        blocks[i].push_back(next);
        gen_partitions(n, next + 1, blocks, out);
        blocks[i].pop_back();
    }
    blocks.push_back({next});
    gen_partitions(n, next + 1, blocks, out);
    blocks.pop_back();
}

std::vector<std::vector<std::vector<int>>> all_set_partitions(int n) {
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<std::vector<int>> blocks;
    gen_partitions(n, 0, blocks, out);
    return out;
}

long double_factorial(int n) {  // n!! for odd n
    long r = 1;
    for (int i = n; i >= 1; i -= 2) r *= i;
    return r;
}

long factorial(int n) {
    long r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

Partition pp(const std::string& s) { return parse_partition(s); }

}  // namespace

TEST_CASE("canonicalize: reorder, fig-1 partition, malformed input") {
    Partition p = Partition::of(2, {{make_point(2, false), make_point(2, true)},
                                    {make_point(1, false), make_point(1, true)}});
    CHECK(p == Partition::identity(2));
    CHECK(to_string(p) == "{1 1'}{2 2'}");

    // {{1,2,3',5},{1',2'},{3},{4,4'},{5'}}
    Partition fig = pp("{1 2 3' 5}{1' 2'}{3}{4 4'}{5'}");
    CHECK(fig.k() == 5);
    CHECK(fig.nc() == 5);
    CHECK(to_string(fig) == "{1 2 3' 5}{1' 2'}{3}{4 4'}{5'}");
    // idempotent: rebuilding from its own blocks is identity
    CHECK(Partition::of(5, fig.blocks()) == fig);

    CHECK_THROWS_AS(Partition::of(1, {{0}, {0}}), MalformedPartition);
    CHECK_THROWS_AS(Partition::of(1, {{0}}), MalformedPartition);
    CHECK_THROWS_AS(Partition::of(1, {{0, 1}, {1}}), MalformedPartition);
}

TEST_CASE("string encoding round-trips bit-exactly") {
    for (int k = 0; k <= 3; ++k) {
        for (const auto& p : enumerate_family(k, FamilyTag::P)) {
            CHECK(parse_partition(to_string(p)) == p);
        }
    }
    CHECK(pp("{1 2'}{2 1'}") == Partition::transposition(2, 1, 2));
}

TEST_CASE("enumerate_family counts vs brute-force oracle") {
    // Spec examples at k = 2.
    CHECK(enumerate_family(2, FamilyTag::S).size() == 2);
    CHECK(enumerate_family(2, FamilyTag::P).size() == 15);
    CHECK(enumerate_family(2, FamilyTag::B).size() == 3);
    CHECK(enumerate_family(2, FamilyTag::H).size() == 4);
    CHECK(enumerate_family(2, FamilyTag::Bs).size() == 10);

    for (int k = 1; k <= 3; ++k) {
        auto brute = all_set_partitions(2 * k);
        CHECK(enumerate_family(k, FamilyTag::P).size() == brute.size());
        CHECK(enumerate_family(k, FamilyTag::B).size() == size_t(double_factorial(2 * k - 1)));
        CHECK(enumerate_family(k, FamilyTag::S).size() == size_t(factorial(k)));

        // Filtered counts agree with predicate filters on the brute set.
        size_t h = 0, bs = 0;
        for (const auto& blocks : brute) {
            bool all_even = true, small = true;
            for (const auto& b : blocks) {
                if (b.size() % 2) all_even = false;
                if (b.size() > 2) small = false;
            }
            if (all_even) ++h;
            if (small) ++bs;
        }
        CHECK(enumerate_family(k, FamilyTag::H).size() == h);
        CHECK(enumerate_family(k, FamilyTag::Bs).size() == bs);
    }

    // No duplicates, all canonical, deterministic order.
    auto fam = enumerate_family(2, FamilyTag::P);
    std::set<std::string> seen;
    for (const auto& p : fam) seen.insert(to_string(p));
    CHECK(seen.size() == fam.size());
    CHECK(fam == enumerate_family(2, FamilyTag::P));

    CHECK_THROWS_AS(enumerate_family(40, FamilyTag::P), CapacityError);
}

TEST_CASE("family inclusions S < B < H < P and S < Bs < P, k <= 4") {
    for (int k = 1; k <= 4; ++k) {
        for (const auto& p : enumerate_family(k, FamilyTag::P)) {
            if (family_member(p, FamilyTag::S)) {
                CHECK(family_member(p, FamilyTag::B));
                CHECK(family_member(p, FamilyTag::Bs));
            }
            if (family_member(p, FamilyTag::B)) CHECK(family_member(p, FamilyTag::H));
        }
    }
}

TEST_CASE("stats") {
    auto t = stats(Partition::transposition(2, 1, 2));
    CHECK(t.nc == 2);
    CHECK(t.cycles == 1);
    CHECK(t.irreducible);

    auto i3 = stats(Partition::identity(3));
    CHECK(i3.nc == 3);
    CHECK(i3.cycles == 3);
    CHECK_FALSE(i3.irreducible);
    CHECK(i3.weakly_irreducible);  // id_k = id_{k-1} (x) id_1

    auto z2 = stats(Partition::zero(2));
    CHECK(z2.nc == 1);
    CHECK(z2.cycles == 1);
    CHECK(z2.irreducible);
    CHECK(z2.exclusive_irreducible);

    // (1,2) (x) (3,4)-type: two non-identity cycles, not weakly irreducible.
    auto two = stats(tensor(Partition::transposition(2, 1, 2), Partition::transposition(2, 1, 2)));
    CHECK(two.cycles == 2);
    CHECK_FALSE(two.weakly_irreducible);
    // (1,2) (x) id_2: weakly irreducible.
    auto wi = stats(tensor(Partition::transposition(2, 1, 2), Partition::identity(2)));
    CHECK(wi.weakly_irreducible);
    // (1,2) (x) 0_1: since 0_1 = {{1,1'}} = id_1 this is still weakly irreducible.
    auto ei = stats(tensor(Partition::transposition(2, 1, 2), Partition::zero(1)));
    CHECK(ei.exclusive_irreducible);
    CHECK(ei.weakly_irreducible);
    // 0_2 (x) 0_2: every cycle is some 0_l, so exclusive-irreducible holds.
    auto zz = stats(tensor(Partition::zero(2), Partition::zero(2)));
    CHECK(zz.exclusive_irreducible);
    CHECK_FALSE(zz.weakly_irreducible);
    // two separated transpositions: two non-0_l cycles.
    CHECK_FALSE(two.exclusive_irreducible);
}

TEST_CASE("transpose") {
    CHECK(transpose(Partition::transposition(2, 1, 2)) == Partition::transposition(2, 1, 2));
    CHECK(transpose(pp("{1 2 2'}{1'}")) == pp("{1}{2 1' 2'}"));
    for (int k = 1; k <= 3; ++k) {
        CHECK(transpose(Partition::identity(k)) == Partition::identity(k));
        for (const auto& p : enumerate_family(k, FamilyTag::P)) CHECK(transpose(transpose(p)) == p);
    }
}

TEST_CASE("join") {
    CHECK(join(Partition::transposition(2, 1, 2), Partition::identity(2)) == Partition::zero(2));
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        CHECK(join(p, p) == p);
        CHECK(join(Partition::zero(2), p) == Partition::zero(2));
    }
    CHECK_THROWS_AS(join(Partition::identity(1), Partition::identity(2)), SizeMismatch);
}

TEST_CASE("compose: examples and algebraic laws") {
    auto r = compose(Partition::transposition(2, 1, 2), Partition::transposition(2, 1, 2));
    CHECK(r.p == Partition::identity(2));
    CHECK(r.kappa == 0);

    auto w = compose(Partition::weyl(2, 1, 2), Partition::weyl(2, 1, 2));
    CHECK(w.p == Partition::weyl(2, 1, 2));
    CHECK(w.kappa == 1);

    const auto& p2 = enumerate_family(2, FamilyTag::P);
    const auto& p3 = enumerate_family(3, FamilyTag::P);
    for (const auto& p : p3) {
        auto e = compose(p, Partition::identity(3));
        CHECK(e.p == p);
        CHECK(e.kappa == 0);
        auto e2 = compose(Partition::identity(3), p);
        CHECK(e2.p == p);
        CHECK(e2.kappa == 0);
    }

    // t(p o q) = tq o tp with equal kappa, all pairs of P_2 and P_3.
    auto check_transpose_antihom = [](const std::vector<Partition>& fam) {
        for (const auto& p : fam)
            for (const auto& q : fam) {
                auto a = compose(p, q);
                auto b = compose(transpose(q), transpose(p));
                CHECK(transpose(a.p) == b.p);
                CHECK(a.kappa == b.kappa);
            }
    };
    check_transpose_antihom(p2);
    check_transpose_antihom(p3);

    // Associativity with additive kappa: exhaustive on P_2, sampled on P_3.
    for (const auto& p : p2)
        for (const auto& q : p2)
            for (const auto& s : p2) {
                auto left = compose(compose(p, q).p, s);
                auto right = compose(p, compose(q, s).p);
                CHECK(left.p == right.p);
                CHECK(compose(p, q).kappa + left.kappa == compose(q, s).kappa + right.kappa);
            }
    std::mt19937 rng(7);
    for (int trial = 0; trial < 4000; ++trial) {
        const auto& p = p3[rng() % p3.size()];
        const auto& q = p3[rng() % p3.size()];
        const auto& s = p3[rng() % p3.size()];
        auto left = compose(compose(p, q).p, s);
        auto right = compose(p, compose(q, s).p);
        CHECK(left.p == right.p);
        CHECK(compose(p, q).kappa + left.kappa == compose(q, s).kappa + right.kappa);
    }
}

TEST_CASE("tensor") {
    CHECK(tensor(Partition::identity(1), Partition::identity(1)) == Partition::identity(2));
    CHECK(tensor(Partition::transposition(2, 1, 2), Partition::identity(1)) ==
          pp("{1 2'}{2 1'}{3 3'}"));
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        CHECK(tensor(Partition(), p) == p);
        CHECK(tensor(p, Partition()) == p);
    }
}

TEST_CASE("extract") {
    CHECK(extract(Partition::transposition(2, 1, 2), {make_point(1, false), make_point(1, true)}) ==
          Partition::singletons(1));
    CHECK(extract(Partition::identity(2), {make_point(2, false), make_point(2, true)}) ==
          Partition::identity(1));
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        std::vector<Point> all = {0, 1, 2, 3};
        CHECK(extract(p, all) == p);
    }
    CHECK_THROWS_AS(extract(Partition::identity(2), {make_point(1, false)}), MalformedPartition);

    // Cutting blocks at a column boundary refines: left (x) right is finer
    // than p for every symmetric column split (the delta in the exclusive
    // freeness characterization tests p^l (x) p^r =) p, a finer-compatibility).
    for (const auto& p : enumerate_family(3, FamilyTag::P))
        for (int k1 = 0; k1 <= 3; ++k1)
            CHECK(is_finer(tensor(left_part(p, k1), right_part(p, k1)), p));
}

TEST_CASE("insert") {
    CHECK(insert(Partition::identity(1), 2, {1}) == Partition::identity(2));
    CHECK(insert(Partition::singletons(1), 2, {2}) == pp("{1 1'}{2}{2'}"));
    for (const auto& p : enumerate_family(2, FamilyTag::P)) CHECK(insert(p, 2, {1, 2}) == p);
    CHECK_THROWS_AS(insert(Partition::identity(1), 2, {3}), MalformedPartition);
    CHECK_THROWS_AS(insert(Partition::identity(2), 2, {2, 1}), MalformedPartition);
}

TEST_CASE("flip") {
    CHECK(flip(Partition::transposition(2, 1, 2), 1) == Partition::weyl(2, 1, 2));
    CHECK(flip(Partition::identity(2), 1) == Partition::identity(2));
    for (const auto& p : enumerate_family(2, FamilyTag::P)) {
        CHECK(flip(p, 2) == p);
        for (int k1 = 0; k1 <= 2; ++k1) {
            CHECK(flip(flip(p, k1), k1) == p);  // involution
            for (auto tag : {FamilyTag::B, FamilyTag::H, FamilyTag::Bs, FamilyTag::P})
                CHECK(family_member(flip(p, k1), tag) == family_member(p, tag));
        }
    }
    // S is not stabilized: flip((1,2), 1) = [1,2] leaves S.
    CHECK_FALSE(family_member(flip(Partition::transposition(2, 1, 2), 1), FamilyTag::S));
    CHECK_THROWS_AS(flip(Partition::identity(2), 3), MalformedPartition);
}

TEST_CASE("kernel") {
    CHECK(kernel({1, 1, 2, 1}) == pp("{1 1' 2'}{2}"));
    CHECK(kernel({1, 2, 3, 4}) == Partition::singletons(2));
    CHECK(kernel({5, 5}) == Partition::identity(1));
    CHECK_THROWS_AS(kernel({0, 1}), MalformedPartition);
}

TEST_CASE("compare: spec examples") {
    auto r1 = compare(Partition::identity(2), Partition::transposition(2, 1, 2));
    CHECK(r1.distance == 1);
    CHECK(r1.leq);

    // bracket [id_2, (1,2)] = {id_2, 0_2, (1,2)} by filtering enumerate(2, P).
    std::set<std::string> bracket;
    for (const auto& p : enumerate_family(2, FamilyTag::P))
        if (leq(Partition::identity(2), p) && leq(p, Partition::transposition(2, 1, 2)))
            bracket.insert(to_string(p));
    CHECK(bracket == std::set<std::string>{to_string(Partition::identity(2)),
                                           to_string(Partition::zero(2)),
                                           to_string(Partition::transposition(2, 1, 2))});

    auto r2 = compare(Partition::identity(2), Partition::zero(2));
    CHECK(r2.distance == Rational(1, 2));
    CHECK(r2.leq);

    auto r3 = compare(pp("{1}{1'}{2 2'}"), pp("{1 2 2'}{1'}"));
    CHECK(r3.finer_compatible);
}

TEST_CASE("metric axioms on P_2 and P_3") {
    for (int k = 2; k <= 3; ++k) {
        const auto& fam = enumerate_family(k, FamilyTag::P);
        const size_t n = fam.size();
        // 2*d as integers for speed
        std::vector<int> d2(n * n);
        auto ncj = join_nc_table(fam);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                d2[i * n + j] = fam[i].nc() + fam[j].nc() - 2 * ncj[i * n + j];
        for (size_t i = 0; i < n; ++i) CHECK(d2[i * n + i] == 0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) CHECK(d2[i * n + j] == d2[j * n + i]);
        bool triangle_ok = true;
        for (size_t i = 0; i < n && triangle_ok; ++i)
            for (size_t j = 0; j < n && triangle_ok; ++j)
                for (size_t l = 0; l < n; ++l)
                    if (d2[i * n + l] > d2[i * n + j] + d2[j * n + l]) {
                        triangle_ok = false;
                        break;
                    }
        CHECK(triangle_ok);
    }
}

TEST_CASE("splittings (F_2)") {
    auto f_id2 = splittings(Partition::identity(2));
    CHECK(f_id2.size() == 4);
    std::set<size_t> sizes;
    for (const auto& s : f_id2) sizes.insert(s.points.size());
    CHECK(sizes == std::set<size_t>{0, 2, 4});

    CHECK(splittings(Partition::transposition(2, 1, 2)).size() == 2);
    CHECK(splittings(Partition::zero(2)).size() == 2);

    // nc additivity and extraction consistency on all of P_3.
    for (const auto& p : enumerate_family(3, FamilyTag::P))
        for (const auto& s : splittings(p)) {
            CHECK(s.left.nc() + s.right.nc() == p.nc());
            CHECK(extract(p, s.points) == s.left);
        }
}

TEST_CASE("product_index_set") {
    auto pis1 = product_index_set(Partition::identity(1));
    REQUIRE(pis1.size() == 1);
    CHECK(pis1[0].first == Partition::identity(1));
    CHECK(pis1[0].second == Partition::identity(1));

    // For (1,2): summation set of the cumulant product formula. (0_2, 0_2)
    // satisfies the geodesic condition but composes to 0_2, not (1,2), so it
    // belongs to the moment-form expansion only.
    auto tr = Partition::transposition(2, 1, 2);
    auto pis = product_index_set(tr);
    std::set<std::pair<std::string, std::string>> got;
    for (auto& [a, b] : pis) got.insert({to_string(a), to_string(b)});
    CHECK(got.count({to_string(Partition::identity(2)), to_string(tr)}) == 1);
    CHECK(got.count({to_string(tr), to_string(Partition::identity(2))}) == 1);
    CHECK(got.count({to_string(Partition::zero(2)), to_string(Partition::zero(2))}) == 0);
    CHECK(compose(Partition::zero(2), Partition::zero(2)).p != tr);
    {
        std::vector<int> tau = {3, 4, 1, 2};
        auto target = compose(tensor(tr, Partition::identity(2)), Partition::from_permutation(tau)).p;
        CHECK(leq(tensor(Partition::zero(2), Partition::zero(2)), target));
    }

    // Property: every pair satisfies p1 <= p and p2 <= tp1 o p.
    for (const auto& p : enumerate_family(2, FamilyTag::P))
        for (const auto& [p1, p2] : product_index_set(p)) {
            CHECK(leq(p1, p));
            CHECK(leq(p2, compose(transpose(p1), p).p));
        }
}

TEST_CASE("orbit_rep") {
    CHECK(orbit_rep(Partition::of(2, {{make_point(2, false), make_point(2, true)},
                                      {make_point(1, false), make_point(1, true)}})) ==
          orbit_rep(Partition::identity(2)));
    CHECK(orbit_rep(pp("{1 2 2'}{1'}")) == orbit_rep(pp("{2 1 1'}{2'}")));

    // orbit of (1,2) in P_2 is a singleton
    auto tr = Partition::transposition(2, 1, 2);
    CHECK(conjugate(tr, {2, 1}) == tr);
    CHECK(orbit_rep(tr) == tr);

    // constant on orbits over all of P_3
    std::mt19937 rng(3);
    for (const auto& p : enumerate_family(3, FamilyTag::P)) {
        std::vector<int> sigma = {1, 2, 3};
        std::shuffle(sigma.begin(), sigma.end(), rng);
        CHECK(orbit_rep(conjugate(p, sigma)) == orbit_rep(p));
    }

    set_orbit_cap(2);
    CHECK_THROWS_AS(orbit_rep(Partition::identity(3)), CapacityError);
    set_orbit_cap(8);
}
