#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "u21/group.hpp"

using namespace u21;

namespace {
GroupCtx ctx3() { return GroupCtx(Padic(3, 6)); }
}

TEST_CASE("named elements are unitary") {
    GroupCtx G = ctx3();
    CHECK(G.is_unitary(G.identity().m));
    CHECK(G.is_unitary(G.alpha().m));
    CHECK(G.is_unitary(G.beta().m));
    CHECK(G.is_unitary(G.beta_prime().m));
    GroupCtx::Sampler S(G, 41);
    for (int i = 0; i < 50; ++i) {
        auto [x, y] = S.n_pair(0, 2);
        CHECK(G.is_unitary(G.make_n(x, y).m));
        CHECK(G.is_unitary(G.make_nprime(x, y).m));
        CHECK(G.is_unitary(G.make_h(S.unit()).m));
    }
}

TEST_CASE("n(0,0) is the identity and constraint violations are rejected") {
    GroupCtx G = ctx3();
    CHECK(G.eq(G.make_n(G.zp().zero(), G.zp().zero()), G.identity()));
    // x = 1, y = 1 violates x conj(x) + y + conj(y) = 0
    CHECK_THROWS_AS(G.make_n(G.zp().one(), G.zp().one()), ConstraintViolation);
    CHECK_THROWS_AS(G.make_h(G.zp().zero()), ConstraintViolation);
}

TEST_CASE("beta' = beta alpha^{-1}, beta in K0, beta' in K1") {
    GroupCtx G = ctx3();
    CHECK(G.eq(G.beta_prime(), G.mul(G.beta(), G.inv(G.alpha()))));
    CHECK(G.member(G.beta(), SubgroupTag::K0));
    CHECK(!G.member(G.beta(), SubgroupTag::K1));
    CHECK(G.member(G.beta_prime(), SubgroupTag::K1));
    CHECK(!G.member(G.beta_prime(), SubgroupTag::K0));
    // alpha is in neither maximal compact
    CHECK(!G.member(G.alpha(), SubgroupTag::K0));
    CHECK(!G.member(G.alpha(), SubgroupTag::K1));
    CHECK(G.member(G.alpha(), SubgroupTag::B));
    CHECK(G.member(G.alpha(), SubgroupTag::H));
}

TEST_CASE("N-product law via matrix multiplication oracle") {
    GroupCtx G = ctx3();
    const Padic& zp = G.zp();
    GroupCtx::Sampler S(G, 42);
    for (int i = 0; i < 100; ++i) {
        auto [x, y] = S.n_pair(0, 2);
        auto [x2, y2] = S.n_pair(0, 2);
        GroupElement prod = G.mul(G.make_n(x, y), G.make_n(x2, y2));
        // n(x,y) n(x',y') = n(x+x', y+y'-x conj(x'))
        EElement nx = zp.add(x, x2);
        EElement ny = zp.sub(zp.add(y, y2), zp.mul(x, zp.conj(x2)));
        CHECK(G.eq(prod, G.make_n(nx, ny)));
    }
}

TEST_CASE("group inverse is exact") {
    GroupCtx G = ctx3();
    GroupCtx::Sampler S(G, 43);
    for (int i = 0; i < 60; ++i) {
        GroupElement g = S.element();
        CHECK(G.is_unitary(g.m));
        CHECK(G.eq(G.mul(g, G.inv(g)), G.identity()));
        CHECK(G.eq(G.mul(G.inv(g), g), G.identity()));
    }
}

TEST_CASE("membership: filtration subgroups") {
    GroupCtx G = ctx3();
    const Padic& zp = G.zp();
    // n(x,y) with val(y) = k is in N_k but not N_{k+1}
    for (int32_t k : {-2, -1, 0, 1, 2}) {
        EElement y = zp.mul(zp.uniformizer_pow(k), zp.sqrt_c());  // trace zero, val k
        GroupElement n = G.make_n(zp.zero(), y);
        CHECK(G.member(n, SubgroupTag::Nk, CompactLabel::K0, k));
        CHECK(!G.member(n, SubgroupTag::Nk, CompactLabel::K0, k + 1));
    }
    // identity is in everything congruence-like
    CHECK(G.member(G.identity(), SubgroupTag::K0p));
    CHECK(G.member(G.identity(), SubgroupTag::K1p));
    CHECK(G.member(G.identity(), SubgroupTag::Kn, CompactLabel::K0, 3));
    CHECK(G.member(G.identity(), SubgroupTag::I1K, CompactLabel::K0));
    CHECK(G.member(G.identity(), SubgroupTag::I1K, CompactLabel::K1));
}

TEST_CASE("coset counts match the pairwise-inequivalence oracle") {
    GroupCtx G = ctx3();

    // Oracle: a complete set of reps must be pairwise inequivalent mod
    // N_{k+j} and every element of a brute-force window scan must be
    // equivalent to exactly one rep.
    auto check_reps = [&](bool primed, int32_t k, uint32_t j, size_t expect) {
        auto reps = G.coset_reps(primed, k, j);
        CHECK(reps.size() == expect);
        SubgroupTag deep = primed ? SubgroupTag::Npk : SubgroupTag::Nk;
        for (size_t a = 0; a < reps.size(); ++a)
            for (size_t b = a + 1; b < reps.size(); ++b) {
                GroupElement d = G.mul(G.inv(reps[a]), reps[b]);
                CHECK(!G.member(d, deep, CompactLabel::K0, k + int32_t(j)));
            }
        // scan: reps of the one-level-finer decomposition all reduce into some rep
        auto finer = G.coset_reps(primed, k, j + 1);
        for (const auto& g : finer) {
            int hits = 0;
            for (const auto& r : reps)
                if (G.member(G.mul(G.inv(r), g), deep, CompactLabel::K0, k + int32_t(j))) ++hits;
            CHECK(hits == 1);
        }
    };

    check_reps(false, 0, 1, 27);  // |N_0/N_1| = q^3
    check_reps(false, 1, 1, 3);   // |N_1/N_2| = q
    check_reps(false, 0, 2, 81);  // |N_0/N_2| = q^4
    check_reps(false, -1, 1, 3);  // |N_{-1}/N_0| = q
    check_reps(true, 1, 1, 3);
    check_reps(true, 2, 1, 27);
}

TEST_CASE("identity (1): beta n(x,y) factors exactly") {
    GroupCtx G = ctx3();
    const Padic& zp = G.zp();
    GroupCtx::Sampler S(G, 44);

    SECTION("x = 0, trace-zero unit y") {
        EElement y = zp.sqrt_c();
        auto f = G.eq1_factor(zp.zero(), y);
        GroupElement lhs = G.mul(G.beta(), G.make_n(zp.zero(), y));
        CHECK(G.eq(lhs, G.mul(G.mul(f.n1, f.h1), f.np1)));
        // the factors specialize to n(0, y^{-1}) h(conj(y)^{-1}) n'(0, y^{-1})
        CHECK(G.eq(f.n1, G.make_n(zp.zero(), zp.inv(y))));
        CHECK(G.eq(f.np1, G.make_nprime(zp.zero(), zp.inv(y))));
    }

    SECTION("500 random valid pairs, p = 3") {
        for (int i = 0; i < 500; ++i) {
            auto [x, y] = S.n_pair(-2, 2);
            if (zp.is_zero(y)) continue;
            auto f = G.eq1_factor(x, y);
            GroupElement lhs = G.mul(G.beta(), G.make_n(x, y));
            CHECK(G.eq(lhs, G.mul(G.mul(f.n1, f.h1), f.np1)));
        }
    }

    SECTION("500 random valid pairs, p = 5") {
        GroupCtx G5(Padic(5, 6));
        GroupCtx::Sampler S5(G5, 45);
        const Padic& zp5 = G5.zp();
        for (int i = 0; i < 500; ++i) {
            auto [x, y] = S5.n_pair(-2, 2);
            if (zp5.is_zero(y)) continue;
            auto f = G5.eq1_factor(x, y);
            GroupElement lhs = G5.mul(G5.beta(), G5.make_n(x, y));
            CHECK(G5.eq(lhs, G5.mul(G5.mul(f.n1, f.h1), f.np1)));
        }
    }

    SECTION("constraint propagation to the factor parameters") {
        for (int i = 0; i < 100; ++i) {
            auto [x, y] = S.n_pair(0, 2);
            if (zp.is_zero(y)) continue;
            EElement ybi = zp.inv(zp.conj(y));
            CHECK(zp.satisfies_constraint(zp.mul(ybi, x), zp.inv(y)));
        }
    }

    SECTION("y = 0 is rejected") {
        CHECK_THROWS_AS(G.eq1_factor(zp.zero(), zp.zero()), ZeroY);
    }
}

TEST_CASE("conjugation by alpha shifts the filtration by two") {
    GroupCtx G = ctx3();
    const Padic& zp = G.zp();

    for (int32_t k : {-1, 0, 1}) {
        for (const auto& n : G.coset_reps(false, k, 1)) {
            // alpha^{-1} N_k alpha = N_{k+2}
            GroupElement c = G.conj_by_alpha(n, -1);
            CHECK(G.member(c, SubgroupTag::Nk, CompactLabel::K0, k + 2));
            auto [x, y] = G.n_params(n);
            auto [cx, cy] = G.n_params(c);
            CHECK(zp.eq(cx, zp.shift(x, 1)));
            CHECK(zp.eq(cy, zp.shift(y, 2)));
        }
        for (const auto& np : G.coset_reps(true, k + 1, 1)) {
            // alpha N'_k alpha^{-1} = N'_{k+2}
            GroupElement c = G.conj_by_alpha(np, 1);
            CHECK(G.member(c, SubgroupTag::Npk, CompactLabel::K0, k + 3));
        }
    }
    // e = 0 is the identity map
    GroupElement n = G.make_n(zp.zero(), zp.sqrt_c());
    CHECK(G.eq(G.conj_by_alpha(n, 0), n));
}

TEST_CASE("level constants from the membership oracle") {
    GroupCtx G = ctx3();
    auto c0 = G.level_constants(CompactLabel::K0);
    auto c1 = G.level_constants(CompactLabel::K1);
    CHECK(c0.n_K + c0.m_K == 1);
    CHECK(c1.n_K + c1.m_K == 1);
    CHECK(c0.n_K == 0);
    CHECK(c0.m_K == 1);
    // The displayed K1 and its pro-p radical force N cap I_{1,K1} = N_{-1}:
    // K1 admits y of valuation -1 in the (1,3) corner and the reduction
    // kills no part of N, while N' must reach valuation 2 to reduce into
    // the unipotent part.  (The pair still sums to 1.)
    CHECK(c1.n_K == -1);
    CHECK(c1.m_K == 2);
}

TEST_CASE("K1 Hecke window counts") {
    GroupCtx G = ctx3();
    // The two Hecke sums at K0: q^4 + q = 84 terms.
    CHECK(G.coset_reps(false, 0, 2).size() + G.coset_reps(false, 1, 1).size() == 84);
    // At K1 (n_K = -1): q^4 + q^3.
    CHECK(G.coset_reps(false, -1, 2).size() == 81);
    CHECK(G.coset_reps(false, 0, 1).size() == 27);
}
