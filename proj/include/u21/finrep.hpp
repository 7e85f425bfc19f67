#pragma once

// Representation theory of the finite quotients: tame torus characters,
// finite principal series as chi-twisted function spaces on the residual
// flag variety, invariants/coinvariants under the residual unipotents,
// the beta_K eigenvalue lambda on the invariant line, the finite-level
// S operator, and a Norton-style irreducibility test.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "u21/finmod.hpp"
#include "u21/gamma.hpp"

namespace u21 {

/// Character of the residual torus k_E^x x k_E^1 with values in F_{q^2}^x,
/// stored as the exponent pair on the two coordinates.
struct TorusChar {
    int64_t e1 = 0;  // exponent on k_E^x, mod q^2-1
    int64_t e2 = 0;  // exponent on the norm-one part, mod q+1

    friend bool operator==(const TorusChar&, const TorusChar&) = default;
};

inline Fq2 torus_char_value(const Fq2Field& F, const TorusChar& chi, Fq2 a, Fq2 u) {
    return F.mul(F.pow_signed(a, chi.e1), F.pow_signed(u, chi.e2));
}

/// chi^s: conjugation by beta_K sends diag(a, u, conj(a)^{-1}) to
/// diag(conj(a)^{-1}, u, a), i.e. a -> a^{-q} on exponents.
inline TorusChar torus_char_twist(const Fq2Field& F, const TorusChar& chi) {
    int64_t m = int64_t(F.order()) - 1;
    TorusChar t;
    t.e1 = ((-int64_t(F.p()) * chi.e1) % m + m) % m;
    t.e2 = chi.e2;
    return t;
}

inline std::vector<TorusChar> all_torus_chars(const Fq2Field& F) {
    std::vector<TorusChar> out;
    int64_t m1 = int64_t(F.order()) - 1;
    int64_t m2 = int64_t(F.p()) + 1;
    for (int64_t e1 = 0; e1 < m1; ++e1)
        for (int64_t e2 = 0; e2 < m2; ++e2) out.push_back({e1, e2});
    return out;
}

/// Finite principal series: functions f on Gamma_K with f(b x) = chi(b) f(x),
/// Gamma acting by right translation.  Basis indexed by the residual flag
/// variety (canonical isotropic-line keys, sorted).
class FiniteSeries {
  public:
    FiniteSeries(const GammaCtx& Ga, TorusChar chi) : Ga_(Ga), chi_(chi), F_(Ga.field()) {
        std::map<uint64_t, GammaElt> reps;
        std::vector<GammaElt> frontier{Ga_.identity()};
        reps[Ga_.coset_key(Ga_.identity())] = Ga_.identity();
        auto gens = Ga_.standard_generators();
        while (!frontier.empty()) {
            std::vector<GammaElt> next;
            for (const auto& r : frontier)
                for (const auto& g : gens) {
                    GammaElt x = Ga_.mul(r, g);
                    uint64_t k = Ga_.coset_key(x);
                    if (!reps.count(k)) {
                        reps[k] = x;
                        next.push_back(x);
                    }
                }
            frontier = std::move(next);
        }
        for (auto& [k, r] : reps) {
            index_[k] = reps_.size();
            reps_.push_back(r);
        }
        base_ = index_.at(Ga_.coset_key(Ga_.identity()));
    }

    const GammaCtx& gamma() const { return Ga_; }
    const TorusChar& chi() const { return chi_; }
    size_t dim() const { return reps_.size(); }
    size_t base_coset() const { return base_; }
    const GammaElt& rep(size_t i) const { return reps_[i]; }

    /// The function supported on the base coset with value 1 at Id.
    FqVec phi_chi() const {
        FqVec v(dim(), F_.zero());
        v[base_] = F_.one();
        return v;
    }

    /// Action matrix of gamma (right translation).
    FqMatrix action(const GammaElt& g) const {
        FqMatrix m(dim(), dim());
        for (size_t i = 0; i < dim(); ++i) {
            GammaElt x = Ga_.mul(reps_[i], g);
            size_t j = index_.at(Ga_.coset_key(x));
            GammaElt b = Ga_.mul(x, Ga_.inv(reps_[j]));
            if (!Ga_.in_borel(b)) throw Error("finite series: witness not in Borel");
            auto [a, u] = Ga_.borel_torus(b);
            m.at(i, j) = F_.add(m.at(i, j), torus_char_value(F_, chi_, a, u));
        }
        return m;
    }

    FqVec act(const GammaElt& g, const FqVec& v) const { return fq_apply(F_, action(g), v); }

    /// Module carrying the standard generator actions.
    FiniteModule as_module() const {
        FiniteModule M;
        M.F = &F_;
        M.dim = dim();
        for (const auto& g : Ga_.standard_generators()) M.gens.push_back(action(g));
        return M;
    }

    /// Action matrices of the full residual unipotent (U or U'), obtained by
    /// reducing a complete filtration window.
    std::vector<FqMatrix> unipotent_actions(bool primed) const {
        const GroupCtx& G = Ga_.group();
        int32_t k;
        if (Ga_.label() == CompactLabel::K0)
            k = 0;  // N_0/N_1 resp. N'_0/N'_1 biject onto U resp. U'
        else
            k = primed ? 1 : -1;  // N_{-1}/N_0 resp. N'_1/N'_2
        std::vector<FqMatrix> mats;
        for (const auto& n : G.coset_reps(primed, k, 1)) mats.push_back(action(Ga_.reduce(n)));
        return mats;
    }

    /// Finite-level S: v -> sum over U-cosets of u beta_K v.  The p-adic
    /// domain condition (fixedness under N'_{m_K}) is vacuous here: that
    /// filtration step reduces to the identity of Gamma_K.
    FqVec s_finite(const FqVec& v) const {
        const GroupCtx& G = Ga_.group();
        int32_t nK = Ga_.label() == CompactLabel::K0 ? 0 : -1;
        GammaElt bK = Ga_.reduce(G.beta_K(Ga_.label()));
        FqVec bv = act(bK, v);
        FqVec out(dim(), F_.zero());
        for (const auto& u : G.coset_reps(false, nK, 1)) {
            FqVec t = act(Ga_.reduce(u), bv);
            for (size_t i = 0; i < dim(); ++i) out[i] = F_.add(out[i], t[i]);
        }
        return out;
    }

  private:
    const GammaCtx& Ga_;
    TorusChar chi_;
    const Fq2Field& F_;
    std::vector<GammaElt> reps_;
    std::map<uint64_t, size_t> index_;
    size_t base_ = 0;
};

/// The function gamma -> eta(det gamma) with eta = (norm-one character)^e,
/// when it lies in the series: nonempty iff chi is of residual det type.
/// This line is the constants-type submodule exhibiting reducibility.
inline std::optional<FqVec> character_line(const FiniteSeries& PS, int64_t e) {
    const GammaCtx& Ga = PS.gamma();
    const Fq2Field& F = Ga.field();
    FqVec v(PS.dim(), F.zero());
    for (size_t i = 0; i < PS.dim(); ++i) v[i] = F.pow_signed(Ga.det(PS.rep(i)), e);
    for (const auto& g : Ga.standard_generators()) {
        FqVec w = PS.act(g, v);
        Fq2 s = F.pow_signed(Ga.det(g), e);
        for (size_t i = 0; i < PS.dim(); ++i)
            if (!(w[i] == F.mul(s, v[i]))) return std::nullopt;
    }
    return v;
}

// ---------- invariants, coinvariants, lambda ----------

/// Basis of the U-fixed subspace of a module given the unipotent actions.
inline std::vector<FqVec> invariant_vectors(const FiniteModule& M,
                                            const std::vector<FqMatrix>& unip) {
    return fixed_space(M, unip);
}

/// Row space of the augmentation image span{(u - 1) w}.
inline EchelonBasis augmentation_image(const FiniteModule& M,
                                       const std::vector<FqMatrix>& unip) {
    const Fq2Field& F = *M.F;
    EchelonBasis aug(F, M.dim);
    for (const FqMatrix& u : unip) {
        for (size_t j = 0; j < M.dim; ++j) {
            FqVec e(M.dim, F.zero());
            e[j] = F.one();
            FqVec w = fq_apply(F, u, e);
            for (size_t i = 0; i < M.dim; ++i) w[i] = F.sub(w[i], e[i]);
            aug.insert(w);
        }
    }
    return aug;
}

/// The unique scalar with beta_K v - lambda v in the I'_1 augmentation
/// subspace, for v spanning the one-dimensional fixed line.
struct LambdaResult {
    Fq2 lambda;
};

inline LambdaResult lambda_beta(const FiniteModule& M, const std::vector<FqMatrix>& unipU,
                                const std::vector<FqMatrix>& unipUp, const FqMatrix& beta_action) {
    const Fq2Field& F = *M.F;
    auto fixed = invariant_vectors(M, unipU);
    if (fixed.size() != 1) throw NotAWeight("fixed space dimension " + std::to_string(fixed.size()));
    const FqVec& v = fixed[0];
    EchelonBasis aug = augmentation_image(M, unipUp);
    FqVec rv = aug.reduce(v);
    if (fq_vec_is_zero(F, rv)) throw NotAWeight("invariant line dies in coinvariants");
    FqVec rb = aug.reduce(fq_apply(F, beta_action, v));
    // rb must be proportional to rv
    size_t piv = 0;
    while (piv < rv.size() && F.is_zero(rv[piv])) ++piv;
    Fq2 lambda = F.mul(rb[piv], F.inv(rv[piv]));
    for (size_t i = 0; i < rv.size(); ++i)
        if (!(rb[i] == F.mul(lambda, rv[i]))) throw NotAWeight("beta v not congruent to a multiple of v");
    return {lambda};
}

// ---------- spun weights ----------

/// A weight realized as a spun submodule of a finite principal series:
/// the ambient series, a row basis, and the restricted module.
struct SpunWeight {
    FiniteModule mod;                // action on the spun coordinates
    std::vector<FqVec> basis;        // rows: coordinates in the ambient space
    std::vector<size_t> pivots;      // pivot columns of the basis rows
    FqVec seed_ambient;              // the spun seed vector (ambient coords)
};

/// Express an ambient vector in spun coordinates (throws if outside).
inline FqVec weight_coords(const Fq2Field& F, const SpunWeight& W, const FqVec& v) {
    FqVec c(W.basis.size(), F.zero());
    FqVec r = v;
    for (size_t k = 0; k < W.basis.size(); ++k) {
        Fq2 coef = r[W.pivots[k]];
        c[k] = coef;
        if (F.is_zero(coef)) continue;
        for (size_t j = 0; j < r.size(); ++j) r[j] = F.sub(r[j], F.mul(coef, W.basis[k][j]));
    }
    if (!fq_vec_is_zero(F, r)) throw Error("vector not in the spun subspace");
    return c;
}

/// Restrict an ambient action matrix to the spun coordinates.
inline FqMatrix restrict_action(const Fq2Field& F, const SpunWeight& W, const FqMatrix& amb) {
    FqMatrix m(W.basis.size(), W.basis.size());
    for (size_t k = 0; k < W.basis.size(); ++k) {
        FqVec img = fq_apply(F, amb, W.basis[k]);
        FqVec c = weight_coords(F, W, img);
        // rows of the restricted matrix act on coordinate vectors: the image
        // of basis row k has coordinates c, and (Mv)_i = sum_k M_{ik} v_k
        for (size_t i = 0; i < W.basis.size(); ++i) m.at(i, k) = c[i];
    }
    return m;
}

/// Build the weight generated by s_finite(phi_{chi^s}) inside the finite
/// principal series of chi^s.
inline SpunWeight build_weight(const FiniteSeries& PS) {
    const Fq2Field& F = PS.gamma().field();
    FqVec w = PS.s_finite(PS.phi_chi());
    FiniteModule amb = PS.as_module();
    EchelonBasis sp = spin(amb, {w});
    SpunWeight W;
    W.seed_ambient = w;
    W.basis = sp.rows();
    // recover pivot columns from the reduced rows
    for (const FqVec& row : W.basis) {
        size_t p = 0;
        while (p < row.size() && F.is_zero(row[p])) ++p;
        W.pivots.push_back(p);
    }
    W.mod.F = &F;
    W.mod.dim = W.basis.size();
    for (const FqMatrix& g : amb.gens) W.mod.gens.push_back(restrict_action(F, W, g));
    return W;
}

// ---------- irreducibility ----------

enum class IrredStatus { Irreducible, Reducible };

struct IrredResult {
    IrredStatus status;
    FqVec witness;  // a vector spinning to a proper submodule, when reducible
};

/// Norton test: for a singular algebra element theta, the module is
/// reducible iff some kernel vector of theta spins to a proper submodule
/// or some kernel vector of theta^T spins to a proper submodule of the
/// transpose module.  All (projective) kernel vectors are enumerated, so
/// a fully checked singular theta is conclusive.
inline IrredResult is_irreducible(const FiniteModule& M, uint64_t seed, int max_trials = 64) {
    const Fq2Field& F = *M.F;
    if (M.dim == 0) throw NotAWeight("zero module");
    if (M.dim == 1) return {IrredStatus::Irreducible, {}};
    std::mt19937_64 rng(seed);

    FiniteModule Mt;
    Mt.F = M.F;
    Mt.dim = M.dim;
    for (const FqMatrix& g : M.gens) Mt.gens.push_back(fq_transpose(g));

    auto random_algebra_element = [&]() {
        FqMatrix th(M.dim, M.dim);
        int terms = 1 + int(rng() % 3);
        for (int t = 0; t < terms; ++t) {
            FqMatrix w = fq_identity(F, M.dim);
            int len = 1 + int(rng() % 3);
            for (int l = 0; l < len; ++l) w = fq_mul(F, w, M.gens[rng() % M.gens.size()]);
            Fq2 c = F.make(rng() % F.p(), rng() % F.p());
            if (F.is_zero(c)) c = F.one();
            for (size_t i = 0; i < th.a.size(); ++i) th.a[i] = F.add(th.a[i], F.mul(c, w.a[i]));
        }
        return th;
    };

    // all projective representatives of a small kernel
    auto projective_vectors = [&](const std::vector<FqVec>& ker) {
        std::vector<FqVec> out;
        size_t n = ker.size();
        if (n == 0) return out;
        if (n > 3) {  // too many to enumerate; fall back to basis vectors
            out = ker;
            return out;
        }
        uint64_t q2 = F.order();
        // last nonzero coordinate normalized to 1
        std::vector<uint64_t> idx(n, 0);
        auto decode = [&](uint64_t code, size_t len) {
            FqVec v(M.dim, F.zero());
            bool nonzero = false;
            for (size_t i = 0; i < len; ++i) {
                uint64_t d = code % q2;
                code /= q2;
                Fq2 c{uint32_t(d / F.p()), uint32_t(d % F.p())};
                if (!F.is_zero(c)) nonzero = true;
                for (size_t j = 0; j < M.dim; ++j) v[j] = F.add(v[j], F.mul(c, ker[i][j]));
            }
            (void)nonzero;
            return v;
        };
        for (size_t top = 0; top < n; ++top) {
            uint64_t span = 1;
            for (size_t i = 0; i < top; ++i) span *= q2;
            for (uint64_t code = 0; code < span; ++code) {
                FqVec v = decode(code, top);
                for (size_t j = 0; j < M.dim; ++j)
                    v[j] = F.add(v[j], ker[top][j]);  // coefficient 1 on the top vector
                out.push_back(std::move(v));
            }
        }
        return out;
    };

    for (int trial = 0; trial < max_trials; ++trial) {
        FqMatrix th = random_algebra_element();
        auto ker = fq_kernel(F, th);
        if (ker.empty() || ker.size() == M.dim) continue;
        bool conclusive = ker.size() <= 3;
        for (const FqVec& v : projective_vectors(ker)) {
            if (fq_vec_is_zero(F, v)) continue;
            if (spin(M, {v}).dim() < M.dim) return {IrredStatus::Reducible, v};
        }
        auto kert = fq_kernel(F, fq_transpose(th));
        bool conclusive_t = kert.size() <= 3;
        for (const FqVec& w : projective_vectors(kert)) {
            if (fq_vec_is_zero(F, w)) continue;
            if (spin(Mt, {w}).dim() < M.dim) {
                // a proper submodule of the transpose witnesses a proper
                // quotient; return a witness in the original module
                return {IrredStatus::Reducible, w};
            }
        }
        if (conclusive && conclusive_t) return {IrredStatus::Irreducible, {}};
    }
    throw Inconclusive("no conclusive singular algebra element found");
}

}  // namespace u21
