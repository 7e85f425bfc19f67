#pragma once

// The finite quotients Gamma_K = K / K^1.  For K0 the reduction is the
// full 3x3 matrix over k_E; for K1 only the corner block (g11, p g13;
// p^{-1} g31, g33) and the center entry g22 survive.  Cosets of the
// residual Borel are identified with residual isotropic lines, which
// gives O(1) canonical forms for the flag variety.

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "u21/decompose.hpp"
#include "u21/group.hpp"

namespace u21 {

/// Element of Gamma_K.  For K1 the layout reuses m[0],m[1],m[3],m[4] for
/// the 2x2 block and m[8] for the U(1) entry; other slots stay zero.
struct GammaElt {
    std::array<Fq2, 9> m{};
};

class GammaCtx {
  public:
    GammaCtx(const GroupCtx& G, CompactLabel K) : G_(G), zp_(G.zp()), K_(K), F_(zp_.residue_field()) {}

    CompactLabel label() const { return K_; }
    const Fq2Field& field() const { return F_; }
    const GroupCtx& group() const { return G_; }

    GammaElt identity() const {
        GammaElt e;
        if (K_ == CompactLabel::K0) {
            e.m[0] = e.m[4] = e.m[8] = F_.one();
        } else {
            e.m[0] = e.m[4] = e.m[8] = F_.one();
        }
        return e;
    }

    /// Reduction K -> Gamma_K; throws NotInK off the subgroup.
    GammaElt reduce(const GroupElement& g) const {
        GammaElt r;
        if (K_ == CompactLabel::K0) {
            if (!G_.member(g, SubgroupTag::K0)) throw NotInK("reduce_to_gamma(K0)");
            for (int i = 0; i < 9; ++i) r.m[i] = res(g.m[i]);
            return r;
        }
        if (!G_.member(g, SubgroupTag::K1)) throw NotInK("reduce_to_gamma(K1)");
        r.m[0] = res(g.m[0]);
        r.m[1] = res(zp_.shift(g.m[2], 1));   // p * g13
        r.m[3] = res(zp_.shift(g.m[6], -1));  // p^{-1} g31
        r.m[4] = res(g.m[8]);
        r.m[8] = res(g.m[4]);                 // center U(1) entry
        return r;
    }

    GammaElt mul(const GammaElt& x, const GammaElt& y) const {
        GammaElt r;
        if (K_ == CompactLabel::K0) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Fq2 s = F_.zero();
                    for (int k = 0; k < 3; ++k)
                        s = F_.add(s, F_.mul(x.m[3 * i + k], y.m[3 * k + j]));
                    r.m[3 * i + j] = s;
                }
            return r;
        }
        r.m[0] = F_.add(F_.mul(x.m[0], y.m[0]), F_.mul(x.m[1], y.m[3]));
        r.m[1] = F_.add(F_.mul(x.m[0], y.m[1]), F_.mul(x.m[1], y.m[4]));
        r.m[3] = F_.add(F_.mul(x.m[3], y.m[0]), F_.mul(x.m[4], y.m[3]));
        r.m[4] = F_.add(F_.mul(x.m[3], y.m[1]), F_.mul(x.m[4], y.m[4]));
        r.m[8] = F_.mul(x.m[8], y.m[8]);
        return r;
    }

    /// Inverse via the residual form: g^{-1} = w frob(g)^T w.
    GammaElt inv(const GammaElt& x) const {
        GammaElt r;
        if (K_ == CompactLabel::K0) {
            // w = antidiag(1,1,1)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r.m[3 * i + j] = F_.frob(x.m[3 * (2 - j) + (2 - i)]);
            return r;
        }
        r.m[0] = F_.frob(x.m[4]);
        r.m[1] = F_.frob(x.m[1]);
        r.m[3] = F_.frob(x.m[3]);
        r.m[4] = F_.frob(x.m[0]);
        r.m[8] = F_.frob(x.m[8]);
        return r;
    }

    bool eq(const GammaElt& x, const GammaElt& y) const { return x.m == y.m; }
    bool is_identity(const GammaElt& x) const { return eq(x, identity()); }

    uint64_t code(const GammaElt& x) const {
        uint64_t k = 0;
        for (const Fq2& e : x.m) k = k * F_.order() + F_.code(e);
        return k;
    }

    /// Determinant (lands in the norm-one subgroup of k_E^x).
    Fq2 det(const GammaElt& x) const {
        if (K_ == CompactLabel::K0) {
            Fq2 d = F_.zero();
            d = F_.add(d, F_.mul(x.m[0], F_.sub(F_.mul(x.m[4], x.m[8]), F_.mul(x.m[5], x.m[7]))));
            d = F_.sub(d, F_.mul(x.m[1], F_.sub(F_.mul(x.m[3], x.m[8]), F_.mul(x.m[5], x.m[6]))));
            d = F_.add(d, F_.mul(x.m[2], F_.sub(F_.mul(x.m[3], x.m[7]), F_.mul(x.m[4], x.m[6]))));
            return d;
        }
        return F_.mul(F_.sub(F_.mul(x.m[0], x.m[4]), F_.mul(x.m[1], x.m[3])), x.m[8]);
    }

    /// Residual Borel membership (block upper for K1).
    bool in_borel(const GammaElt& x) const {
        if (K_ == CompactLabel::K0)
            return F_.is_zero(x.m[3]) && F_.is_zero(x.m[6]) && F_.is_zero(x.m[7]);
        return F_.is_zero(x.m[3]);
    }

    /// Diagonal torus data (a, u) of a Borel element: chi(b) = a^{e1} u^{e2}.
    std::pair<Fq2, Fq2> borel_torus(const GammaElt& b) const {
        if (K_ == CompactLabel::K0) return {b.m[0], b.m[4]};
        return {b.m[0], b.m[8]};
    }

    // ---- residual flag variety ----

    /// Canonical residual isotropic line g^{-1} e1, pivot-normalized.
    /// Identifies the coset (residual Borel) \ Gamma.
    uint64_t coset_key(const GammaElt& g) const {
        GammaElt gi = inv(g);
        if (K_ == CompactLabel::K0) {
            std::array<Fq2, 3> v{gi.m[0], gi.m[3], gi.m[6]};
            int pivot = 0;
            while (pivot < 3 && F_.is_zero(v[pivot])) ++pivot;
            Fq2 s = F_.inv(v[pivot]);
            uint64_t k = uint64_t(pivot);
            for (auto& e : v) k = k * F_.order() + F_.code(F_.mul(s, e));
            return k;
        }
        std::array<Fq2, 2> v{gi.m[0], gi.m[3]};
        int pivot = F_.is_zero(v[0]) ? 1 : 0;
        Fq2 s = F_.inv(v[pivot]);
        uint64_t k = uint64_t(pivot);
        for (auto& e : v) k = k * F_.order() + F_.code(F_.mul(s, e));
        return k;
    }

    // ---- generators and group closure ----

    /// Reductions of standard subgroup families, enough to generate Gamma_K.
    std::vector<GammaElt> standard_generators() const {
        std::vector<GammaElt> gens;
        if (K_ == CompactLabel::K0) {
            for (const auto& n : G_.coset_reps(false, 0, 1)) gens.push_back(reduce(n));
            for (const auto& n : G_.coset_reps(true, 0, 1)) gens.push_back(reduce(n));
        } else {
            for (const auto& n : G_.coset_reps(false, -1, 1)) gens.push_back(reduce(n));
            for (const auto& n : G_.coset_reps(true, 1, 1)) gens.push_back(reduce(n));
        }
        for (const auto& t : torus_lifts()) gens.push_back(reduce(t));
        gens.push_back(reduce(G_.beta_K(K_)));
        return gens;
    }

    /// Exact lifts generating the full residual torus k_E^x x k_E^1.
    std::vector<GroupElement> torus_lifts() const {
        std::vector<GroupElement> out;
        Fq2 g = F_.generator();
        EElement a = zp_.teichmuller(g);
        out.push_back(G_.make_diag(a, zp_.one()));
        // norm-one generator: g^{q-1} has norm g^{(q-1)(q+1)} = g^{q^2-1} = 1
        Fq2 u = F_.pow(g, zp_.p() - 1);
        out.push_back(G_.make_diag(zp_.one(), zp_.teichmuller(u)));
        return out;
    }

    /// Full group closure (oracle-sized; |Gamma_K| is small).
    size_t group_order() const {
        std::vector<GammaElt> frontier{identity()};
        std::unordered_set<uint64_t> seen{code(identity())};
        auto gens = standard_generators();
        while (!frontier.empty()) {
            std::vector<GammaElt> next;
            for (const auto& x : frontier)
                for (const auto& g : gens) {
                    GammaElt y = mul(x, g);
                    if (seen.insert(code(y)).second) next.push_back(y);
                }
            frontier = std::move(next);
        }
        return seen.size();
    }

  private:
    Fq2 res(const EElement& e) const {
        if (zp_.is_zero(e) || e.val > 0) return F_.zero();
        if (e.val < 0) throw NotInK("negative valuation entry in reduction");
        return zp_.unit_residue(e);
    }

    const GroupCtx& G_;
    const Padic& zp_;
    CompactLabel K_;
    const Fq2Field& F_;
};

}  // namespace u21
