#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "u21/smooth.hpp"

using namespace u21;

namespace {
struct Fixture {
    GroupCtx G{Padic(3, 6)};
    Decomposer D{G};
    PSLevelSpace sp1{D, 1};
    PSLevelSpace sp2{D, 2};
};

// brute-force count of isotropic primitive lines over o/p^n
size_t brute_line_count(const Padic& zp, uint32_t n) {
    uint64_t m = zp.p_pow(n);
    auto conj = [&](std::pair<uint64_t, uint64_t> x) {
        return std::pair{x.first, (m - x.second) % m};
    };
    auto mul = [&](std::pair<uint64_t, uint64_t> x, std::pair<uint64_t, uint64_t> y) {
        return std::pair{(x.first * y.first + zp.c() % m * x.second % m * y.second) % m,
                         (x.first * y.second + x.second * y.first) % m};
    };
    auto add = [&](std::pair<uint64_t, uint64_t> x, std::pair<uint64_t, uint64_t> y) {
        return std::pair{(x.first + y.first) % m, (x.second + y.second) % m};
    };
    auto is_unit = [&](std::pair<uint64_t, uint64_t> x) {
        return x.first % zp.p() != 0 || x.second % zp.p() != 0;
    };
    // inverse of a unit by brute scan (m is tiny)
    auto inv = [&](std::pair<uint64_t, uint64_t> x) {
        for (uint64_t a = 0; a < m; ++a)
            for (uint64_t b = 0; b < m; ++b) {
                auto y = std::pair{a, b};
                auto z = mul(x, y);
                if (z.first == 1 && z.second == 0) return y;
            }
        throw std::runtime_error("no inverse");
    };
    std::set<std::array<uint64_t, 6>> canon;
    for (uint64_t a1 = 0; a1 < m; ++a1)
        for (uint64_t b1 = 0; b1 < m; ++b1)
            for (uint64_t a2 = 0; a2 < m; ++a2)
                for (uint64_t b2 = 0; b2 < m; ++b2)
                    for (uint64_t a3 = 0; a3 < m; ++a3)
                        for (uint64_t b3 = 0; b3 < m; ++b3) {
                            std::array<std::pair<uint64_t, uint64_t>, 3> v{
                                std::pair{a1, b1}, std::pair{a2, b2}, std::pair{a3, b3}};
                            int pivot = -1;
                            for (int i = 0; i < 3 && pivot < 0; ++i)
                                if (is_unit(v[i])) pivot = i;
                            if (pivot < 0) continue;
                            // isotropy: tr(v1 conj(v3)) + norm(v2) = 0 mod p^n
                            auto t = mul(v[0], conj(v[2]));
                            auto nn = mul(v[1], conj(v[1]));
                            uint64_t iso = (2 * t.first % m + nn.first) % m;
                            if (iso != 0) continue;
                            auto s = inv(v[pivot]);
                            std::array<uint64_t, 6> key{};
                            for (int i = 0; i < 3; ++i) {
                                auto w = mul(s, v[i]);
                                key[2 * i] = w.first;
                                key[2 * i + 1] = w.second;
                            }
                            key[0] = key[0] * 4 + uint64_t(pivot);  // fold pivot in
                            canon.insert(key);
                        }
    return canon.size();
}
}  // namespace

TEST_CASE("model dimensions match the brute-force line oracle") {
    Fixture F;
    CHECK(F.sp1.dim() == 28);
    CHECK(F.sp2.dim() == 756);
    CHECK(brute_line_count(F.G.zp(), 1) == 28);
    // level 2 brute force is 9^6 iterations with an inner inverse scan;
    // restrict to the cheaper consistency check 756 = 28 * 27
    CHECK(F.sp2.dim() == F.sp1.dim() * 27);
}

TEST_CASE("evaluation: left equivariance and right invariance") {
    Fixture F;
    BCharacter eps{3, 5, 2};
    PSModel M(F.sp2, eps);
    GroupCtx::Sampler S(F.G, 401);
    const Fq2Field& Fq = M.field();
    // random vector
    FqVec f(M.dim());
    for (auto& c : f) c = Fq.make(S.raw() % 3, S.raw() % 3);
    for (int t = 0; t < 60; ++t) {
        GroupElement g = S.element();
        // f(b g) = eps(b) f(g) for upper-triangular b
        GroupElement h = F.G.make_h(S.unit());
        auto [x, y] = S.n_pair(0, 2);
        GroupElement b = F.G.mul(h, F.G.make_n(x, y));
        Fq2 lhs = M.eval(f, F.G.mul(b, g));
        Fq2 rhs = Fq.mul(M.eps().at_borel(F.G.zp(), b), M.eval(f, g));
        CHECK(lhs == rhs);
        // f(g k) = f(g) for k in the level congruence subgroup
        GroupElement kdeep = F.G.identity();
        for (const auto& n : F.G.coset_reps(false, 4, 1))
            if (!F.G.eq(n, F.G.identity())) { kdeep = n; break; }
        CHECK(M.eval(f, F.G.mul(g, kdeep)) == M.eval(f, g));
    }
}

TEST_CASE("act: composition law and level shifts") {
    Fixture F;
    BCharacter eps{1, 2, 1};
    PSModel M1(F.sp1, eps);
    GroupCtx::Sampler S(F.G, 402);
    const Fq2Field& Fq = M1.field();
    FqVec f(M1.dim());
    for (auto& c : f) c = Fq.make(S.raw() % 3, S.raw() % 3);

    SECTION("identity acts trivially") {
        CHECK(M1.act(F.G.identity(), f, F.sp1) == f);
    }

    SECTION("K0 elements compose: act(g, act(h, f)) = act(hg, f)") {
        for (int t = 0; t < 100; ++t) {
            GroupElement g = S.compact_element(CompactLabel::K0);
            GroupElement h = S.compact_element(CompactLabel::K0);
            FqVec hf = M1.act(h, f, F.sp1);
            PSModel M1b(F.sp1, eps);
            FqVec ghf = M1b.act(g, hf, F.sp1);
            FqVec hgf = M1.act(F.G.mul(g, h), f, F.sp1);
            CHECK(ghf == hgf);
        }
    }

    SECTION("alpha preserves the constant line at trivial eps") {
        BCharacter triv{0, 0, 0};
        PSModel Mt(F.sp1, triv);
        FqVec ones(Mt.dim(), Fq.one());
        // alpha raises the level by 2; the translate equals the promoted
        // constant vector of the level-3 model
        PSLevelSpace sp3(F.D, 3);
        FqVec af = Mt.act(F.G.alpha(), ones, sp3);
        FqVec ones3 = Mt.promote(ones, sp3);
        CHECK(af == ones3);
        FqVec ai = Mt.act(F.G.inv(F.G.alpha()), ones, sp3);
        CHECK(ai == ones3);
    }
}

TEST_CASE("pro-p Iwahori invariants: dimension two and the paper basis") {
    Fixture F;
    std::vector<BCharacter> sample{{0, 0, 0}, {1, 2, 1}, {5, 7, 3}, {4, 0, 2}};
    for (const BCharacter& eps : sample) {
        for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
            PSModel M(F.sp2, eps);
            InvariantCalculator IC(M.space(), K);
            auto basis = IC.normalized_basis(M);
            CHECK(basis.fixed_dim == 2);
            const Fq2Field& Fq = M.field();
            GroupElement bK = F.G.beta_K(K);
            CHECK(M.eval(basis.g1, F.G.identity()) == Fq.one());
            CHECK(M.eval(basis.g1, bK) == Fq.zero());
            CHECK(M.eval(basis.g2, F.G.identity()) == Fq.zero());
            CHECK(M.eval(basis.g2, bK) == Fq.one());
            CHECK(IC.is_fixed(M, basis.g1));
            CHECK(IC.is_fixed(M, basis.g2));
            // g1 + g2 evaluates to (1,1) at (Id, beta_K)
            FqVec s(M.dim());
            for (size_t i = 0; i < s.size(); ++i) s[i] = Fq.add(basis.g1[i], basis.g2[i]);
            CHECK(M.eval(s, F.G.identity()) == Fq.one());
            CHECK(M.eval(s, bK) == Fq.one());
        }
        // level 1 at K0 also has the two-dimensional fixed space
        PSModel M1(F.sp1, eps);
        InvariantCalculator IC1(M1.space(), CompactLabel::K0);
        CHECK(IC1.normalized_basis(M1).fixed_dim == 2);
    }
}

TEST_CASE("at K1 the level-1 fixed space degenerates") {
    // I_{1,K1}-fixed vectors are K1^1-fixed hence level 2, but the level-1
    // congruence subgroup is not contained in I_{1,K1}: the two cells merge.
    Fixture F;
    PSModel M(F.sp1, BCharacter{1, 2, 1});
    InvariantCalculator IC(M.space(), CompactLabel::K1);
    CHECK(IC.fixed_vectors(M).size() < 2);
}

TEST_CASE("S operators: preconditions, Prop 2.3 shadow, eigenvector identity") {
    Fixture F;
    const Fq2Field& Fq = F.G.zp().residue_field();
    std::vector<BCharacter> sample{{0, 0, 0}, {1, 2, 1}, {5, 7, 3}, {2, 6, 0}};
    for (const BCharacter& eps : sample) {
        for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
            PSModel M(F.sp2, eps);
            InvariantCalculator IC(M.space(), K);
            SOperators S(M.space(), K);
            auto basis = IC.normalized_basis(M);
            // S_K and S_- preserve I1-fixedness on the full fixed basis
            for (const FqVec* v : {&basis.g1, &basis.g2}) {
                FqVec sk = S.apply(M, SOp::S_K, *v);
                CHECK(IC.is_fixed(M, sk));
                FqVec sm = S.apply(M, SOp::S_minus, *v);
                CHECK(IC.is_fixed(M, sm));
            }
            // S_+ g2 = eps(alpha) g2 exactly
            FqVec sp = S.apply(M, SOp::S_plus, basis.g2);
            Fq2 ea = M.eps().at_alpha();
            FqVec expect(M.dim());
            for (size_t i = 0; i < expect.size(); ++i) expect[i] = Fq.mul(ea, basis.g2[i]);
            CHECK(sp == expect);
        }
    }

    SECTION("S_K annihilates G-fixed vectors at trivial eps") {
        PSModel Mt(F.sp2, BCharacter{0, 0, 0});
        SOperators S(Mt.space(), CompactLabel::K0);
        FqVec ones(Mt.dim(), Fq.one());
        CHECK(fq_vec_is_zero(Fq, S.apply(Mt, SOp::S_K, ones)));
    }

    SECTION("precondition violations raise") {
        PSModel M(F.sp2, BCharacter{1, 1, 1});
        SOperators S(M.space(), CompactLabel::K0);
        GroupCtx::Sampler Srng(F.G, 403);
        FqVec junk(M.dim());
        for (auto& c : junk) c = Fq.make(Srng.raw() % 3, Srng.raw() % 3);
        CHECK_THROWS_AS(S.apply(M, SOp::S_K, junk), PreconditionNotFixed);
    }
}

TEST_CASE("faithfulness probe: materialized S sums agree with lazy evaluation at level 3") {
    Fixture F;
    PSLevelSpace sp3(F.D, 3);
    BCharacter eps{1, 2, 1};
    PSModel M(F.sp2, eps);
    InvariantCalculator IC(M.space(), CompactLabel::K0);
    SOperators S(M.space(), CompactLabel::K0);
    auto basis = IC.normalized_basis(M);
    FqVec sk = S.apply(M, SOp::S_K, basis.g2);
    // the materialized result, extended globally, must agree with the lazy
    // term sum at every level-3 coset representative
    int bad = 0;
    sp3.for_each_rep([&](size_t, const GroupElement& rep) {
        if (!(M.eval(sk, rep) == S.eval_term_sum(M, SOp::S_K, basis.g2, rep))) ++bad;
    });
    CHECK(bad == 0);
    FqVec sm = S.apply(M, SOp::S_minus, basis.g2);
    bad = 0;
    sp3.for_each_rep([&](size_t, const GroupElement& rep) {
        if (!(M.eval(sm, rep) == S.eval_term_sum(M, SOp::S_minus, basis.g2, rep))) ++bad;
    });
    CHECK(bad == 0);
}

TEST_CASE("g2 lies in kappa and the smoothing step certifies descent") {
    Fixture F;
    BCharacter eps{2, 3, 1};
    for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
        PSModel M(F.sp2, eps);
        InvariantCalculator IC(M.space(), K);
        SOperators S(M.space(), K);
        auto basis = IC.normalized_basis(M);
        CHECK(M.eval(basis.g2, F.G.identity()) == M.field().zero());  // in kappa
        // fixed at the automatic depth, certified one step lower
        int32_t m_K = SOperators::level_constants(K).second;
        int32_t k = 0;
        while (m_K + 2 * k < 2 * 2 - 1) ++k;  // automatic depth: N'_{2n-1} at level n = 2
        CHECK(nprime_smoothing_step(M, S, K, basis.g2, k));
        // a vector violating the eigen-relation fails the hypothesis
        CHECK_THROWS_AS(nprime_smoothing_step(M, S, K, basis.g1, k), HypothesisFailed);
    }
}

TEST_CASE("evaluation at the identity is a B-map to eps") {
    Fixture F;
    BCharacter eps{4, 1, 3};
    PSModel M(F.sp2, eps);
    GroupCtx::Sampler S(F.G, 404);
    const Fq2Field& Fq = M.field();
    FqVec f(M.dim());
    for (auto& c : f) c = Fq.make(S.raw() % 3, S.raw() % 3);
    for (int t = 0; t < 50; ++t) {
        GroupElement h = F.G.make_h(S.unit());
        auto [x, y] = S.n_pair(0, 2);
        GroupElement b = F.G.mul(F.G.make_n(x, y), h);
        // eval(b f) = eps(b) eval(f): (b f)(Id) = f(b)
        FqVec bf = M.act(b, f, F.sp2);
        Fq2 lhs = M.eval(bf, F.G.identity());
        Fq2 rhs = Fq.mul(M.eps().at_borel(F.G.zp(), b), M.eval(f, F.G.identity()));
        CHECK(lhs == rhs);
    }
}
