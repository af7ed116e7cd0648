#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "palab/tables.hpp"

using namespace palab;

namespace {

Partition pp(const std::string& s) { return parse_partition(s); }

Rational rnd_rat(std::mt19937& rng) {
    Rational r(long(rng() % 19) - 9, long(rng() % 7) + 1);
    r.canonicalize();
    return r;
}

MomentTable random_table(int k_max, const std::string& label, std::mt19937& rng,
                         FamilyTag tag = FamilyTag::P) {
    MomentTable m;
    m.tag = tag;
    for (int k = 1; k <= k_max; ++k)
        for (const auto& p : enumerate_family(k, tag)) m.set(p, constant_word(k, label), rnd_rat(rng));
    return m;
}

}  // namespace

TEST_CASE("table keys enforce permutation covariance") {
    MomentTable m;
    std::mt19937 rng(2);
    auto p = pp("{1 2 2'}{1'}");
    Word w = {"a", "b"};
    m.set(p, w, Rational(7));
    // conjugated key reads the same value
    auto pc = conjugate(p, {2, 1});
    Word wc = {"b", "a"};
    CHECK(m.at(pc, wc) == 7);
    CHECK(m.at(p, w) == 7);
    // m_empty defaults to 1
    CHECK(m.at(Partition(), {}) == 1);
    CHECK_THROWS_AS(m.at(Partition::identity(1), {"z"}), MissingEntry);
}

TEST_CASE("family_order agrees with compare() on P_2") {
    const auto& fo = family_order(2, FamilyTag::P);
    const auto& items = *fo.items;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t j = 0; j < items.size(); ++j) {
            if (i == j) continue;
            auto rep = compare(items[j], items[i]);
            bool in_leq = std::find(fo.leq_down[i].begin(), fo.leq_down[i].end(), int(j)) !=
                          fo.leq_down[i].end();
            CHECK(in_leq == rep.leq);
            bool in_cc = std::find(fo.coarser_comp[i].begin(), fo.coarser_comp[i].end(), int(j)) !=
                         fo.coarser_comp[i].end();
            CHECK(in_cc == rep.coarser_compatible);
            bool in_fc = std::find(fo.finer_comp[i].begin(), fo.finer_comp[i].end(), int(j)) !=
                         fo.finer_comp[i].end();
            CHECK(in_fc == rep.finer_compatible);
        }
    }
}

TEST_CASE("moments_to_cumulants: spec examples") {
    std::mt19937 rng(3);
    MomentTable m = random_table(2, "a", rng);
    CumulantTable kt = moments_to_cumulants(m, FamilyTag::P);
    Word w1 = constant_word(1, "a"), w2 = constant_word(2, "a");

    CHECK(kt.at(Partition::identity(1), w1) == m.at(Partition::identity(1), w1));
    CHECK(kt.at(Partition::zero(2), w2) ==
          m.at(Partition::zero(2), w2) - m.at(Partition::identity(2), w2));
    CHECK(kt.at(Partition::transposition(2, 1, 2), w2) ==
          m.at(Partition::transposition(2, 1, 2), w2) - m.at(Partition::zero(2), w2));
}

TEST_CASE("transform round-trips are exact identities (k <= 3)") {
    std::mt19937 rng(4);
    for (auto tag : {FamilyTag::P, FamilyTag::S, FamilyTag::B}) {
        MomentTable m = random_table(3, "x", rng, tag);
        CumulantTable kt = moments_to_cumulants(m, tag);
        MomentTable back = cumulants_to_moments(kt);
        for (const auto& [key, v] : m.entries()) CHECK(back.at(key.p, key.word) == v);

        if (tag == FamilyTag::P) {
            MomentTable ex = exclusive_transform(m, tag, ExclusiveDirection::to_exclusive);
            MomentTable back2 = exclusive_transform(ex, tag, ExclusiveDirection::from_exclusive);
            for (const auto& [key, v] : m.entries()) CHECK(back2.at(key.p, key.word) == v);
        }
    }
}

TEST_CASE("cumulants_to_moments: delta table") {
    CumulantTable kt;
    kt.tag = FamilyTag::P;
    Rational c(5, 3);
    kt.set(Partition::identity(1), constant_word(1, "a"), c);
    kt.set(Partition::singletons(1), constant_word(1, "a"), Rational(0));
    MomentTable m = cumulants_to_moments(kt);
    CHECK(m.at(Partition::identity(1), constant_word(1, "a")) == c);
}

TEST_CASE("exclusive transform: spec examples") {
    std::mt19937 rng(5);
    MomentTable m = random_table(2, "a", rng);
    MomentTable ex = exclusive_transform(m, FamilyTag::P, ExclusiveDirection::to_exclusive);
    Word w1 = constant_word(1, "a");

    // id_1 has no strict coarser-compatible partner
    CHECK(ex.at(Partition::identity(1), w1) == m.at(Partition::identity(1), w1));
    // -|-set of 1_1 is {1_1, id_1}
    CHECK(ex.at(Partition::singletons(1), w1) ==
          m.at(Partition::singletons(1), w1) - m.at(Partition::identity(1), w1));
}

TEST_CASE("cumulants_to_exclusive") {
    std::mt19937 rng(6);
    MomentTable m = random_table(3, "a", rng);
    CumulantTable kt = moments_to_cumulants(m, FamilyTag::P);
    MomentTable ex = exclusive_transform(m, FamilyTag::P, ExclusiveDirection::to_exclusive);
    Word w1 = constant_word(1, "a");

    // m_{1_1^c} = kappa_{1_1}, and it matches m_{1_1} - m_{id_1}
    CHECK(cumulants_to_exclusive(kt, Partition::singletons(1), w1) ==
          kt.at(Partition::singletons(1), w1));
    CHECK(cumulants_to_exclusive(kt, Partition::singletons(1), w1) ==
          m.at(Partition::singletons(1), w1) - m.at(Partition::identity(1), w1));

    // the displayed sum equals the exclusive transform on all of P_2, P_3
    for (int k = 2; k <= 3; ++k)
        for (const auto& p : enumerate_family(k, FamilyTag::P))
            CHECK(cumulants_to_exclusive(kt, p, constant_word(k, "a")) ==
                  ex.at(p, constant_word(k, "a")));

    // for p in B_k the =)-up-set is {p} alone: m_{p^c} = kappa_p exactly
    for (int k = 2; k <= 3; ++k)
        for (const auto& p : enumerate_family(k, FamilyTag::B)) {
            int up = 0;
            for (const auto& q : enumerate_family(k, FamilyTag::P))
                if (is_finer(q, p) && q.nc() - cycles(q) == p.nc() - cycles(p)) ++up;
            CHECK(up == 1);
            CHECK(cumulants_to_exclusive(kt, p, constant_word(k, "a")) ==
                  kt.at(p, constant_word(k, "a")));
        }

    // empty up-set within S: p = 1_1 has no finer-compatible permutation
    CumulantTable ks;
    ks.tag = FamilyTag::S;
    ks.set(Partition::identity(1), w1, Rational(3));
    CHECK(cumulants_to_exclusive(ks, Partition::singletons(1), w1) == 0);
}

TEST_CASE("restrict / extend") {
    // kappa supported on S_2 only, extended to P
    CumulantTable ks;
    ks.tag = FamilyTag::S;
    Word w1 = constant_word(1, "u"), w2 = constant_word(2, "u");
    Rational a(2), b(-3, 2), c(1, 4);
    ks.set(Partition::identity(1), w1, a);
    ks.set(Partition::identity(2), w2, b);
    ks.set(Partition::transposition(2, 1, 2), w2, c);
    MomentTable ms = cumulants_to_moments(ks);
    MomentTable mp = extend_table(ms, FamilyTag::S, FamilyTag::P);

    // m_{(1,2)} = kappa_{id_2} + kappa_{(1,2)}; 0_2 not in S_2
    CHECK(mp.at(Partition::transposition(2, 1, 2), w2) == b + c);
    // natural extension: kappa^P_p = delta_{p in S} kappa^S_p
    CumulantTable kp = moments_to_cumulants(mp, FamilyTag::P);
    CHECK(kp.at(Partition::zero(2), w2) == 0);
    CHECK(kp.at(Partition::identity(2), w2) == b);
    CHECK(kp.at(Partition::transposition(2, 1, 2), w2) == c);
    // extended m_{1_1} = kappa^S_{id_1} (only id_1 lies below 1_1 in S)
    CHECK(mp.at(Partition::singletons(1), w1) == a);

    // extend then restrict is the identity
    MomentTable back = restrict_table(mp, FamilyTag::P, FamilyTag::S);
    for (const auto& [key, v] : ms.entries()) CHECK(back.at(key.p, key.word) == v);

    CHECK_THROWS_AS(extend_table(mp, FamilyTag::P, FamilyTag::S), std::invalid_argument);
    CHECK_THROWS_AS(restrict_table(ms, FamilyTag::S, FamilyTag::P), std::invalid_argument);
}

TEST_CASE("expand_products") {
    std::mt19937 rng(7);
    MomentTable m;
    m.tag = FamilyTag::P;
    // fill grade 2 with both mixed words
    for (const auto& p : enumerate_family(2, FamilyTag::P))
        for (const Word& w : {Word{"a", "b"}, Word{"a", "a"}, Word{"b", "b"}, Word{"b", "a"}})
            m.set(p, w, rnd_rat(rng));

    // m_{id_1}(ab) = m_{(1,2)}(a, b)
    auto [key, word] = expanded_key(Partition::identity(1), {{"a", "b"}});
    CHECK(key == Partition::transposition(2, 1, 2));
    CHECK(word == Word{"a", "b"});
    CHECK(expand_products(m, Partition::identity(1), {{"a", "b"}}) ==
          m.at(Partition::transposition(2, 1, 2), {"a", "b"}));

    // traciality through covariance: m_{(1,2)}(a,b) = m_{(1,2)}(b,a)
    CHECK(m.at(Partition::transposition(2, 1, 2), {"a", "b"}) ==
          m.at(Partition::transposition(2, 1, 2), {"b", "a"}));

    // singleton words: identity lookup
    for (const auto& p : enumerate_family(2, FamilyTag::P))
        CHECK(expand_products(m, p, {{"a"}, {"b"}}) == m.at(p, {"a", "b"}));
}

TEST_CASE("factorization predicates") {
    // character table: kappa_{p1 (x) p2} = kappa_{p1} kappa_{p2}
    SpectralForm f;
    f.set_class(Partition::identity(1), Rational(2));
    f.set_class(Partition::singletons(1), Rational(1, 2));
    f.set_class(Partition::transposition(2, 1, 2), Rational(3));
    CumulantTable kt;
    kt.tag = FamilyTag::P;
    for (int k = 1; k <= 4; ++k)
        for (const auto& p : enumerate_family(k, FamilyTag::P)) {
            // multiplicative over cycles
            Rational v(1);
            for (const auto& cyc : cycle_sets(p)) {
                std::vector<Point> pts(cyc.begin(), cyc.end());
                v *= f.at_class(extract(p, pts));
                if (v == 0) break;
            }
            kt.set(p, constant_word(k, "d"), v);
        }
    CHECK(cumulants_factorize(kt, "d", 4));
    MomentTable m = cumulants_to_moments(kt);
    CHECK(moments_factorize(m, "d", 4));

    // perturb one tensor entry: both predicates fail
    MomentTable bad = m;
    auto t22 = tensor(Partition::transposition(2, 1, 2), Partition::transposition(2, 1, 2));
    bad.set(t22, constant_word(4, "d"), m.at(t22, constant_word(4, "d")) + 1);
    CHECK_FALSE(moments_factorize(bad, "d", 4));
    CHECK_FALSE(cumulants_factorize(moments_to_cumulants(bad, FamilyTag::P), "d", 4));
}

TEST_CASE("json round trip") {
    std::mt19937 rng(8);
    MomentTable m = random_table(2, "a", rng, FamilyTag::B);
    m.set(pp("{1 2 2'}{1'}"), {"a", "b"}, Rational(-7, 3));
    std::string js = table_to_json(m, "moments");
    MomentTable back;
    std::string kind;
    table_from_json(js, back, &kind);
    CHECK(kind == "moments");
    CHECK(back.tag == FamilyTag::B);
    CHECK(back.entries() == m.entries());
}
