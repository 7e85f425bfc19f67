#include <catch2/catch_amalgamated.hpp>

#include "u21/gamma.hpp"

using namespace u21;

namespace {
struct Fixture {
    GroupCtx G{Padic(3, 6)};
};
}  // namespace

TEST_CASE("reduction is a homomorphism with kernel K^1") {
    Fixture F;
    auto& G = F.G;
    for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
        GammaCtx Ga(G, K);
        GroupCtx::Sampler S(G, 201);
        for (int t = 0; t < 200; ++t) {
            GroupElement a = S.compact_element(K);
            GroupElement b = S.compact_element(K);
            CHECK(Ga.eq(Ga.reduce(G.mul(a, b)), Ga.mul(Ga.reduce(a), Ga.reduce(b))));
            CHECK(Ga.eq(Ga.reduce(G.inv(a)), Ga.inv(Ga.reduce(a))));
        }
        // kernel = K^1: reduction trivial iff member of the pro-p radical
        SubgroupTag kp = (K == CompactLabel::K0) ? SubgroupTag::K0p : SubgroupTag::K1p;
        for (int t = 0; t < 300; ++t) {
            GroupElement a = S.compact_element(K);
            CHECK(Ga.is_identity(Ga.reduce(a)) == G.member(a, kp));
        }
        CHECK_THROWS_AS(Ga.reduce(G.alpha()), NotInK);
    }
}

TEST_CASE("elements of K^1 reduce to the identity") {
    Fixture F;
    auto& G = F.G;
    const Padic& zp = G.zp();
    GammaCtx Ga0(G, CompactLabel::K0);
    GammaCtx Ga1(G, CompactLabel::K1);
    // generators of deep filtration steps lie in the kernels
    for (const auto& n : G.coset_reps(false, 2, 1)) {
        CHECK(Ga0.is_identity(Ga0.reduce(n)));
        CHECK(Ga1.is_identity(Ga1.reduce(n)));
    }
    for (const auto& n : G.coset_reps(true, 2, 1)) {
        CHECK(Ga0.is_identity(Ga0.reduce(n)));
        CHECK(Ga1.is_identity(Ga1.reduce(n)));  // N'_2 = N' cap K1^1
    }
    // ... while N'_1 \ N'_2 is seen by the K1 block
    int nontrivial = 0;
    for (const auto& n : G.coset_reps(true, 1, 1))
        if (!Ga1.is_identity(Ga1.reduce(n))) ++nontrivial;
    CHECK(nontrivial == 2);  // q - 1 nonzero block-lower classes
    GroupElement deep = G.make_diag(zp.add(zp.one(), zp.shift(zp.one(), 1)), zp.one());
    CHECK(Ga0.is_identity(Ga0.reduce(deep)));
    CHECK(Ga1.is_identity(Ga1.reduce(deep)));
}

TEST_CASE("group closure saturates at the full finite unitary groups") {
    Fixture F;
    auto& G = F.G;
    // |Gamma_K0| = q^3 (q+1)(q^2-1)(q^3+1): the full unitary group of the
    // residual hermitian form (determinant ranges over all of k^1).
    GammaCtx Ga0(G, CompactLabel::K0);
    CHECK(Ga0.group_order() == 24192);
    // |Gamma_K1| = |U(1,1)(k)| * |U(1)(k)| = q(q+1)(q^2-1) * (q+1)
    GammaCtx Ga1(G, CompactLabel::K1);
    CHECK(Ga1.group_order() == 384);
}

TEST_CASE("residual flag varieties have q^3+1 and q+1 points") {
    Fixture F;
    auto& G = F.G;
    for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
        GammaCtx Ga(G, K);
        std::unordered_set<uint64_t> keys;
        std::vector<GammaElt> frontier{Ga.identity()};
        keys.insert(Ga.coset_key(Ga.identity()));
        auto gens = Ga.standard_generators();
        while (!frontier.empty()) {
            std::vector<GammaElt> next;
            for (const auto& x : frontier)
                for (const auto& g : gens) {
                    GammaElt y = Ga.mul(x, g);
                    if (keys.insert(Ga.coset_key(y)).second) next.push_back(y);
                }
            frontier = std::move(next);
        }
        CHECK(keys.size() == (K == CompactLabel::K0 ? 28u : 4u));
    }
}

TEST_CASE("coset keys are left-Borel invariants") {
    Fixture F;
    auto& G = F.G;
    for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
        GammaCtx Ga(G, K);
        GroupCtx::Sampler S(G, 202);
        auto torus = Ga.torus_lifts();
        for (int t = 0; t < 100; ++t) {
            GammaElt g = Ga.reduce(S.compact_element(K));
            GammaElt b = Ga.reduce(torus[t % torus.size()]);
            CHECK(Ga.in_borel(b));
            CHECK(Ga.coset_key(Ga.mul(b, g)) == Ga.coset_key(g));
        }
    }
}
