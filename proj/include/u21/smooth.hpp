#pragma once

// Finite-level models of the smooth principal series Ind_B^G eps.  A level-n
// model is the space of functions on (B cap K0)\K0/K_n; cosets are canonical
// isotropic lines mod p^n, and a model vector extends to a function on all
// of G through f(b k) = eps(b) f(k), so vectors evaluate anywhere via the
// Iwasawa decomposition.  Per-element translation tables keep the character
// sweeps scalar-only.

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "u21/decompose.hpp"
#include "u21/finrep.hpp"

namespace u21 {

/// Tame character of B: chi1 on E^x (value at the uniformizer as a power
/// of the fixed generator of F_{q^2}^x, plus Teichmueller exponent) and
/// chi2 on the norm-one subgroup.
struct BCharacter {
    int64_t m1 = 0;  // chi1(p) = gen^{m1}, exponent mod q^2-1
    int64_t t1 = 0;  // chi1 on units via residue^{t1}, mod q^2-1
    int64_t t2 = 0;  // chi2 via residue^{t2}, mod q+1

    friend bool operator==(const BCharacter&, const BCharacter&) = default;
};

inline std::vector<BCharacter> all_tame_characters(const Fq2Field& F) {
    std::vector<BCharacter> out;
    int64_t m = int64_t(F.order()) - 1;
    for (int64_t m1 = 0; m1 < m; ++m1)
        for (int64_t t1 = 0; t1 < m; ++t1)
            for (int64_t t2 = 0; t2 < int64_t(F.p()) + 1; ++t2) out.push_back({m1, t1, t2});
    return out;
}

/// Restriction of eps to the residual torus of I_K/I_{1,K}.
inline TorusChar residual_char(const BCharacter& eps) { return {eps.t1, eps.t2}; }

/// eps = eta o det for a tame character eta of E^1?  Solving on generators:
/// chi1(p) = eta(p/conj p) = eta(1) = 1 and chi1|units = eta(a^{1-q}),
/// chi2 = eta, so m1 = 0 and t1 = (1-q) t2 mod q^2-1.
struct DetTwist {
    bool is_twist;
    int64_t eta_exponent;  // valid when is_twist
};

inline DetTwist is_det_twist(const Fq2Field& F, const BCharacter& eps) {
    int64_t m = int64_t(F.order()) - 1;
    int64_t q = int64_t(F.p());
    bool ok = eps.m1 % m == 0 && ((eps.t1 - (1 - q) * eps.t2) % m + m) % m == 0;
    return {ok, eps.t2};
}

/// eps evaluated from extracted Borel data (val of the E^x part, residue
/// of its unit, residue of the norm-one part).
struct BWitness {
    int32_t val_a = 0;
    Fq2 res_a;
    Fq2 res_u;
};

/// Witness quotient: data of b1 b2^{-1} given the data of b1 and b2.
inline BWitness witness_sub(const Fq2Field& F, const BWitness& x, const BWitness& y) {
    return {x.val_a - y.val_a, F.mul(x.res_a, F.inv(y.res_a)), F.mul(x.res_u, F.inv(y.res_u))};
}

class EpsEvaluator {
  public:
    EpsEvaluator(const Fq2Field& F, BCharacter eps) : F_(F), eps_(eps), gen_(F.generator()) {}

    const BCharacter& eps() const { return eps_; }

    Fq2 value(const BWitness& w) const {
        Fq2 v = F_.pow_signed(gen_, eps_.m1 * w.val_a);
        v = F_.mul(v, F_.pow_signed(w.res_a, eps_.t1));
        return F_.mul(v, F_.pow_signed(w.res_u, eps_.t2));
    }

    Fq2 at_alpha() const { return F_.pow_signed(gen_, -eps_.m1); }  // eps(alpha) = chi1(p)^{-1}

    /// eps(b) for an explicit upper-triangular group element.
    Fq2 at_borel(const Padic& zp, const GroupElement& b) const {
        const EElement& a = b.m[0];
        const EElement& u = b.m[4];
        BWitness w{a.val, zp.unit_residue(a), zp.unit_residue(u)};
        return value(w);
    }

  private:
    const Fq2Field& F_;
    BCharacter eps_;
    Fq2 gen_;
};

/// Character-independent level-n coset geometry, built by orbit closure.
/// Representatives are reconstructed from the BFS tree on demand.
/// Generators of N_k (resp N'_k) modulo deep congruence: the two x-part
/// one-parameter directions at the window floor and the central t-part.
inline std::vector<GroupElement> filtration_generators(const GroupCtx& G, bool primed,
                                                       int32_t k) {
    const Padic& zp = G.zp();
    int32_t xlo = (k >= 0) ? (k + 1) / 2 : -((-k) / 2);
    std::vector<GroupElement> out;
    auto push = [&](EElement x, EElement t) {
        EElement y = zp.add(zp.neg(zp.halve(zp.norm(x))), zp.mul(t, zp.sqrt_c()));
        out.push_back(primed ? G.make_nprime(x, y) : G.make_n(x, y));
    };
    push(zp.uniformizer_pow(xlo), zp.uniformizer_pow(k));
    push(zp.mul(zp.uniformizer_pow(xlo), zp.sqrt_c()), zp.uniformizer_pow(k));
    push(zp.zero(), zp.uniformizer_pow(k));
    return out;
}

class PSLevelSpace {
  public:
    PSLevelSpace(const Decomposer& D, uint32_t level) : D_(D), G_(D.group()), level_(level) {
        build();
    }

    uint32_t level() const { return level_; }
    size_t dim() const { return keys_.size(); }
    const Decomposer& decomposer() const { return D_; }
    const GroupCtx& group() const { return G_; }

    size_t locate_key(uint64_t key) const {
        auto it = index_.find(key);
        if (it == index_.end()) throw Error("model coset missing (saturation)");
        return it->second;
    }

    /// Walk all representatives in index order with exact group elements.
    template <typename F>
    void for_each_rep(F&& f) const {
        for (size_t i = 0; i < keys_.size(); ++i) f(i, reconstruct(i));
    }

    GroupElement reconstruct(size_t i) const {
        if (i < cached_.size()) return cached_[i];
        GroupElement g = reconstruct(parent_[i].first);
        return G_.mul(g, bfs_gens_[parent_[i].second]);
    }

    /// Locate g's coset and extract the eps data of the Borel part.
    struct Loc {
        uint32_t index;
        BWitness w;
    };

    Loc locate_eval(const GroupElement& g) const {
        const Padic& zp = G_.zp();
        GroupElement gi = G_.inv(g);
        std::array<EElement, 3> v{gi.m[0], gi.m[3], gi.m[6]};
        int32_t content = INT32_MAX;
        for (const auto& e : v)
            if (!zp.is_zero(e)) content = std::min(content, e.val);
        std::array<EElement, 3> w;
        for (int j = 0; j < 3; ++j) w[j] = zp.is_zero(v[j]) ? v[j] : zp.shift(v[j], -content);
        int pivot = 0;
        while (pivot < 3 && (w[pivot].zero || w[pivot].val != 0)) ++pivot;
        if (pivot == 3) throw Error("locate_eval: no pivot");
        // residue of the unit part of a: inverse of the pivot entry residue
        Fq2 res_a = zp.residue_field().inv(zp.unit_residue(w[pivot]));
        EElement s = zp.inv(w[pivot]);
        std::array<EElement, 3> canon;
        for (int j = 0; j < 3; ++j) canon[j] = zp.mul(s, w[j]);
        uint64_t key = line_key_digits(canon, pivot);
        size_t idx = locate_key(key);
        // val(a) = -content; res_u from determinants
        const Fq2Field& F = zp.residue_field();
        Fq2 det_g = zp.residue(G_.mat_det(g.m));
        Fq2 det_rep = det_cache_[idx];
        Fq2 res_detb = F.mul(det_g, F.inv(det_rep));
        Fq2 res_u = F.mul(res_detb, F.pow(res_a, zp.p() - 1));
        return {uint32_t(idx), BWitness{-content, res_a, res_u}};
    }

    /// Translation/evaluation table: row i encodes the value of a source
    /// vector's global extension at ref_i * g, where ref_i is the implicit
    /// canonical representative of this space's i-th coset (the stored
    /// representative's own Borel witness is divided out, so rows relate
    /// canonical-frame values on both sides).
    struct Entry {
        uint32_t j;
        BWitness w;
    };

    std::vector<Entry> eval_table(const PSLevelSpace& src, const GroupElement& g) const {
        const Fq2Field& F = G_.zp().residue_field();
        std::vector<Entry> out(dim());
        for_each_rep([&](size_t i, const GroupElement& rep) {
            auto loc = src.locate_eval(G_.mul(rep, g));
            out[i] = {loc.index, witness_sub(F, loc.w, self_[i])};
        });
        return out;
    }

    const BWitness& self_witness(size_t i) const { return self_[i]; }

    size_t id_index() const { return id_idx_; }

  private:
    uint64_t line_key_digits(const std::array<EElement, 3>& canon, int pivot) const {
        const Padic& zp = G_.zp();
        uint64_t base = zp.p_pow(level_);
        uint64_t key = uint64_t(pivot);
        for (const auto& e : canon) {
            auto [a, b] = zp.digits(e, level_);
            key = key * base + a;
            key = key * base + b;
        }
        return key;
    }

    void build() {
        const Padic& zp = G_.zp();
        // generators: one-parameter unipotent directions (their additive
        // closure reaches every digit), torus Teichmueller generators,
        // one-unit torus generators, and beta
        for (const auto& n : filtration_generators(G_, false, 0)) bfs_gens_.push_back(n);
        for (const auto& n : filtration_generators(G_, true, 0)) bfs_gens_.push_back(n);
        GammaCtx Ga(G_, CompactLabel::K0);
        for (const auto& t : Ga.torus_lifts()) bfs_gens_.push_back(t);
        for (uint32_t d = 1; d < level_; ++d) {
            EElement pd = zp.uniformizer_pow(int32_t(d));
            EElement a1 = zp.add(zp.one(), pd);
            EElement a2 = zp.add(zp.one(), zp.mul(pd, zp.sqrt_c()));
            bfs_gens_.push_back(G_.make_diag(a1, zp.one()));
            bfs_gens_.push_back(G_.make_diag(a2, zp.one()));
            bfs_gens_.push_back(G_.make_diag(zp.one(), zp.div(a2, zp.conj(a2))));
        }
        bfs_gens_.push_back(G_.beta());

        GroupElement id = G_.identity();
        keys_.push_back(D_.line_key_of(id, level_));
        index_[keys_[0]] = 0;
        parent_.push_back({0, 0});
        cached_.push_back(id);
        std::vector<size_t> frontier{0};
        bool cache = true;
        while (!frontier.empty()) {
            std::vector<size_t> next;
            for (size_t i : frontier) {
                GroupElement rep = reconstruct(i);
                for (size_t gidx = 0; gidx < bfs_gens_.size(); ++gidx) {
                    GroupElement cand = G_.mul(rep, bfs_gens_[gidx]);
                    uint64_t key = D_.line_key_of(cand, level_);
                    if (index_.count(key)) continue;
                    index_[key] = keys_.size();
                    keys_.push_back(key);
                    parent_.push_back({uint32_t(i), uint32_t(gidx)});
                    if (cache && cached_.size() < kRepCacheMax) cached_.push_back(cand);
                    next.push_back(keys_.size() - 1);
                }
            }
            frontier = std::move(next);
        }
        // determinant residues of all representatives
        det_cache_.resize(dim());
        const Fq2Field& F = zp.residue_field();
        for_each_rep([&](size_t i, const GroupElement& rep) {
            det_cache_[i] = zp.residue(G_.mat_det(rep.m));
        });
        id_idx_ = locate_key(D_.line_key_of(id, level_));
        // Borel witnesses of the stored representatives relative to the
        // canonical frame
        self_.resize(dim());
        for_each_rep([&](size_t i, const GroupElement& rep) {
            self_[i] = locate_eval(rep).w;
        });
    }

    static constexpr size_t kRepCacheMax = 25000;

    const Decomposer& D_;
    const GroupCtx& G_;
    uint32_t level_;
    std::vector<uint64_t> keys_;
    std::unordered_map<uint64_t, size_t> index_;
    std::vector<std::pair<uint32_t, uint32_t>> parent_;
    std::vector<GroupElement> cached_;
    std::vector<GroupElement> bfs_gens_;
    std::vector<Fq2> det_cache_;
    std::vector<BWitness> self_;
    size_t id_idx_ = 0;
};

/// A model vector is an FqVec of values at the level cosets; this class
/// binds the geometry to a character and provides the operations.
class PSModel {
  public:
    PSModel(const PSLevelSpace& space, BCharacter eps)
        : sp_(space), eps_(space.group().zp().residue_field(), eps) {}

    const PSLevelSpace& space() const { return sp_; }
    const EpsEvaluator& eps() const { return eps_; }
    const Fq2Field& field() const { return sp_.group().zp().residue_field(); }
    size_t dim() const { return sp_.dim(); }

    /// Evaluate the global extension of a model vector anywhere on G.
    Fq2 eval(const FqVec& f, const GroupElement& g) const {
        auto loc = sp_.locate_eval(g);
        return field().mul(eps_.value(loc.w), f[loc.index]);
    }

    /// Apply a precomputed translation table.
    FqVec apply_table(const std::vector<PSLevelSpace::Entry>& tab, const FqVec& f) const {
        FqVec out(tab.size(), field().zero());
        for (size_t i = 0; i < tab.size(); ++i)
            out[i] = field().mul(eps_.value(tab[i].w), f[tab[i].j]);
        return out;
    }

    /// g acting by right translation, materialized on a target space
    /// (coordinates in the target's canonical frame).
    FqVec act(const GroupElement& g, const FqVec& f, const PSLevelSpace& target) const {
        const Fq2Field& F = field();
        FqVec out(target.dim(), F.zero());
        target.for_each_rep([&](size_t i, const GroupElement& rep) {
            Fq2 v = eval(f, target.group().mul(rep, g));
            out[i] = F.mul(F.inv(eps_.value(target.self_witness(i))), v);
        });
        return out;
    }

    /// Restriction of a deeper-level vector to a coarser space (exact
    /// descent; raises if the vector is not constant on fibers).
    FqVec descend(const FqVec& f, const PSLevelSpace& from, const PSLevelSpace& to) const {
        const Fq2Field& F = field();
        FqVec out(to.dim(), F.zero());
        std::vector<bool> seen(to.dim(), false);
        from.for_each_rep([&](size_t i, const GroupElement& rep) {
            auto loc = to.locate_eval(rep);
            Fq2 val_at_rep = F.mul(eps_.value(from.self_witness(i)), f[i]);
            Fq2 v = F.mul(F.inv(eps_.value(loc.w)), val_at_rep);
            if (!seen[loc.index]) {
                out[loc.index] = v;
                seen[loc.index] = true;
            } else if (!(out[loc.index] == v)) {
                throw Error("descend: vector not constant on fibers");
            }
        });
        return out;
    }

    /// Promote a coarser vector to a finer space of the same character.
    FqVec promote(const FqVec& f, const PSLevelSpace& to) const {
        const Fq2Field& F = field();
        FqVec out(to.dim(), F.zero());
        to.for_each_rep([&](size_t i, const GroupElement& rep) {
            Fq2 v = eval(f, rep);
            out[i] = F.mul(F.inv(eps_.value(to.self_witness(i))), v);
        });
        return out;
    }

  private:
    const PSLevelSpace& sp_;
    EpsEvaluator eps_;
};

/// Generators of I_{1,K} modulo the level congruence subgroup: three per
/// Iwahori factor (x-part, sqrt(c)-part, central t-part / torus one-units).
inline std::vector<GroupElement> i1_generators(const GroupCtx& G, CompactLabel K) {
    const Padic& zp = G.zp();
    auto lc_n = (K == CompactLabel::K0) ? 0 : -1;
    auto lc_m = (K == CompactLabel::K0) ? 1 : 2;
    std::vector<GroupElement> out;
    auto n_of = [&](EElement x, int32_t tval) {
        EElement t = zp.uniformizer_pow(tval);
        EElement y = zp.add(zp.neg(zp.halve(zp.norm(x))), zp.mul(t, zp.sqrt_c()));
        return std::pair{x, y};
    };
    // N_{n_K}: x-generators at the window floor, t-generator
    {
        int32_t xlo = (lc_n >= 0) ? (lc_n + 1) / 2 : -((-lc_n) / 2);
        auto [x1, y1] = n_of(zp.uniformizer_pow(xlo), lc_n);
        out.push_back(G.make_n(x1, y1));
        auto [x2, y2] = n_of(zp.mul(zp.uniformizer_pow(xlo), zp.sqrt_c()), lc_n);
        out.push_back(G.make_n(x2, y2));
        auto [x3, y3] = n_of(zp.zero(), lc_n);
        out.push_back(G.make_n(x3, y3));
    }
    // N'_{m_K}
    {
        int32_t xlo = (lc_m + 1) / 2;
        auto [x1, y1] = n_of(zp.uniformizer_pow(xlo), lc_m);
        out.push_back(G.make_nprime(x1, y1));
        auto [x2, y2] = n_of(zp.mul(zp.uniformizer_pow(xlo), zp.sqrt_c()), lc_m);
        out.push_back(G.make_nprime(x2, y2));
        auto [x3, y3] = n_of(zp.zero(), lc_m);
        out.push_back(G.make_nprime(x3, y3));
    }
    // H^1: one-unit torus generators
    EElement a1 = zp.add(zp.one(), zp.uniformizer_pow(1));
    EElement a2 = zp.add(zp.one(), zp.mul(zp.uniformizer_pow(1), zp.sqrt_c()));
    out.push_back(G.make_diag(a1, zp.one()));
    out.push_back(G.make_diag(a2, zp.one()));
    out.push_back(G.make_diag(zp.one(), zp.div(a2, zp.conj(a2))));
    return out;
}

/// The two-dimensional pro-p Iwahori fixed space with the paper's basis
/// normalization g1(Id) = 1, g1(beta_K) = 0, g2(Id) = 0, g2(beta_K) = 1.
struct I1FixedBasis {
    FqVec g1, g2;
    size_t fixed_dim;
};

class InvariantCalculator {
  public:
    InvariantCalculator(const PSLevelSpace& sp, CompactLabel K) : sp_(sp), K_(K) {
        const GroupCtx& G = sp.group();
        for (const auto& t : i1_generators(G, K))
            tables_.push_back(sp.eval_table(sp, t));
    }

    /// Basis of the I_{1,K}-fixed vectors of the model.
    std::vector<FqVec> fixed_vectors(const PSModel& M) const {
        const Fq2Field& F = M.field();
        CocycleSolver solver(F, M.dim());
        for (const auto& tab : tables_)
            for (size_t i = 0; i < tab.size(); ++i)
                solver.relate(i, tab[i].j, M.eps().value(tab[i].w));
        return solver.solution_basis();
    }

    bool is_fixed(const PSModel& M, const FqVec& f) const {
        for (const auto& tab : tables_)
            if (!(M.apply_table(tab, f) == f)) return false;
        return true;
    }

    /// Normalized basis (throws UnexpectedDimension unless the space is 2
    /// dimensional and the two evaluation points separate it).
    I1FixedBasis normalized_basis(const PSModel& M) const {
        const Fq2Field& F = M.field();
        const GroupCtx& G = sp_.group();
        auto fixed = fixed_vectors(M);
        if (fixed.size() != 2)
            throw UnexpectedDimension("I1-fixed space has dimension " +
                                      std::to_string(fixed.size()));
        GroupElement bK = G.beta_K(K_);
        // values of the two basis vectors at Id and beta_K
        Fq2 a = M.eval(fixed[0], G.identity());
        Fq2 b = M.eval(fixed[0], bK);
        Fq2 c = M.eval(fixed[1], G.identity());
        Fq2 d = M.eval(fixed[1], bK);
        Fq2 det = F.sub(F.mul(a, d), F.mul(b, c));
        if (F.is_zero(det)) throw UnexpectedDimension("evaluation pair does not separate");
        Fq2 dinv = F.inv(det);
        auto combine = [&](Fq2 x, Fq2 y) {
            FqVec v(M.dim(), F.zero());
            for (size_t i = 0; i < M.dim(); ++i)
                v[i] = F.add(F.mul(x, fixed[0][i]), F.mul(y, fixed[1][i]));
            return v;
        };
        // solve [a c; b d] [x y]^T = e_1, e_2
        FqVec g1 = combine(F.mul(d, dinv), F.neg(F.mul(b, dinv)));
        FqVec g2 = combine(F.neg(F.mul(c, dinv)), F.mul(a, dinv));
        return {g1, g2, fixed.size()};
    }

  private:
    const PSLevelSpace& sp_;
    CompactLabel K_;
    std::vector<std::vector<PSLevelSpace::Entry>> tables_;
};

// ---------- the S operators ----------

enum class SOp { S_K, S_minus, S_plus };

/// Exact coset sums S_K, S_-, S_+ = S_K o S_-.  Results are materialized on
/// the model's own space; on pro-p-Iwahori fixed vectors this is the true
/// level (the result is again fixed), which callers certify
/// via is_fixed plus deeper probes.
class SOperators {
  public:
    SOperators(const PSLevelSpace& sp, CompactLabel K) : sp_(sp), K_(K) {
        const GroupCtx& G = sp.group();
        auto lc = level_constants(K);
        GroupElement bK = G.beta_K(K);
        for (const auto& u : G.coset_reps(false, lc.first, 1))
            tk_.push_back(sp.eval_table(sp, G.mul(u, bK)));
        GroupElement bai = G.mul(bK, G.inv(G.alpha()));
        for (const auto& u : G.coset_reps(true, lc.second, 1))
            tm_.push_back(sp.eval_table(sp, G.mul(u, bai)));
        // fixedness test tables
        for (const auto& t : filtration_generators(G, false, lc.first))
            fix_n_.push_back(sp.eval_table(sp, t));
        for (const auto& t : filtration_generators(G, true, lc.second))
            fix_np_.push_back(sp.eval_table(sp, t));
    }

    static std::pair<int32_t, int32_t> level_constants(CompactLabel K) {
        return K == CompactLabel::K0 ? std::pair{0, 1} : std::pair{-1, 2};
    }

    bool fixed_by_N(const PSModel& M, const FqVec& f) const {
        for (const auto& t : fix_n_)
            if (!(M.apply_table(t, f) == f)) return false;
        return true;
    }
    bool fixed_by_Nprime(const PSModel& M, const FqVec& f) const {
        for (const auto& t : fix_np_)
            if (!(M.apply_table(t, f) == f)) return false;
        return true;
    }

    FqVec apply(const PSModel& M, SOp which, const FqVec& f) const {
        switch (which) {
            case SOp::S_K: {
                if (!fixed_by_Nprime(M, f))
                    throw PreconditionNotFixed("S_K needs an N'_{m_K}-fixed vector");
                return sum(M, tk_, f);
            }
            case SOp::S_minus: {
                if (!fixed_by_N(M, f))
                    throw PreconditionNotFixed("S_- needs an N_{n_K}-fixed vector");
                return sum(M, tm_, f);
            }
            case SOp::S_plus:
                return apply(M, SOp::S_K, apply(M, SOp::S_minus, f));
        }
        throw Error("unreachable");
    }

    /// Lazy global evaluation of (S_K f) or (S_- f) at an arbitrary point
    /// (for faithfulness probes at finer levels).
    Fq2 eval_term_sum(const PSModel& M, SOp which, const FqVec& f, const GroupElement& x) const {
        const GroupCtx& G = sp_.group();
        auto lc = level_constants(K_);
        const Fq2Field& F = M.field();
        Fq2 s = F.zero();
        if (which == SOp::S_K) {
            GroupElement bK = G.beta_K(K_);
            for (const auto& u : G.coset_reps(false, lc.first, 1))
                s = F.add(s, M.eval(f, G.mul(x, G.mul(u, bK))));
            return s;
        }
        if (which == SOp::S_minus) {
            GroupElement bai = G.mul(G.beta_K(K_), G.inv(G.alpha()));
            for (const auto& u : G.coset_reps(true, lc.second, 1))
                s = F.add(s, M.eval(f, G.mul(x, G.mul(u, bai))));
            return s;
        }
        throw Error("eval_term_sum: S_plus not supported lazily");
    }

  private:
    FqVec sum(const PSModel& M, const std::vector<std::vector<PSLevelSpace::Entry>>& tabs,
              const FqVec& f) const {
        const Fq2Field& F = M.field();
        FqVec out(M.dim(), F.zero());
        for (const auto& t : tabs) {
            FqVec term = M.apply_table(t, f);
            for (size_t i = 0; i < out.size(); ++i) out[i] = F.add(out[i], term[i]);
        }
        return out;
    }

    const PSLevelSpace& sp_;
    CompactLabel K_;
    std::vector<std::vector<PSLevelSpace::Entry>> tk_, tm_, fix_n_, fix_np_;
};

/// One smoothing step of the Thm-4.2 mechanism: given the eigen-relation
/// v = eps(alpha)^{-1} S_+ v and fixedness under N'_{m_K + 2k}, certify
/// fixedness under N'_{m_K + 2k - 2} by direct generator check.
inline bool nprime_smoothing_step(const PSModel& M, const SOperators& S, CompactLabel K,
                                  const FqVec& v, int32_t k) {
    const GroupCtx& G = M.space().group();
    const Fq2Field& F = M.field();
    int32_t m_K = SOperators::level_constants(K).second;
    // hypothesis: the eigen-relation holds
    FqVec sv = S.apply(M, SOp::S_plus, v);
    Fq2 ea = M.eps().at_alpha();
    for (size_t i = 0; i < v.size(); ++i)
        if (!(F.mul(ea, v[i]) == sv[i])) throw HypothesisFailed("v != eps(alpha)^{-1} S_+ v");
    // hypothesis: fixed at depth m_K + 2k
    auto fixed_at = [&](int32_t depth) {
        for (const auto& t : filtration_generators(G, true, depth)) {
            auto tab = M.space().eval_table(M.space(), t);
            if (!(M.apply_table(tab, v) == v)) return false;
        }
        return true;
    };
    if (!fixed_at(m_K + 2 * k)) throw HypothesisFailed("v not fixed at the stated depth");
    return fixed_at(m_K + 2 * k - 2);
}

}  // namespace u21
