#pragma once

// Compact induction ind_K^G sigma with finite support, the Hecke operator
// T given by the two-sum coset formula on hat_f_{v0} and extended to
// general vectors by equivariance via a cached base image, and the
// reciprocity comparison against the principal-series realization.

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "u21/finrep.hpp"
#include "u21/smooth.hpp"

namespace u21 {

/// Word table over Gamma_K: parent pointers of the BFS closure, for
/// writing arbitrary elements as products of the standard generators.
class GammaWordTable {
  public:
    explicit GammaWordTable(const GammaCtx& Ga) : Ga_(Ga), gens_(Ga.standard_generators()) {
        GammaElt id = Ga_.identity();
        index_[Ga_.code(id)] = 0;
        elems_.push_back(id);
        parent_.push_back({0, 0});
        size_t head = 0;
        while (head < elems_.size()) {
            GammaElt x = elems_[head];
            for (size_t g = 0; g < gens_.size(); ++g) {
                GammaElt y = Ga_.mul(x, gens_[g]);
                uint64_t c = Ga_.code(y);
                if (index_.count(c)) continue;
                index_[c] = elems_.size();
                elems_.push_back(y);
                parent_.push_back({uint32_t(head), uint32_t(g)});
            }
            ++head;
        }
    }

    size_t order() const { return elems_.size(); }
    const std::vector<GammaElt>& generators() const { return gens_; }

    /// Generator indices whose ordered product equals x.
    std::vector<uint32_t> word(const GammaElt& x) const {
        auto it = index_.find(Ga_.code(x));
        if (it == index_.end()) throw Error("element outside the generated group");
        std::vector<uint32_t> w;
        size_t i = it->second;
        while (i != 0) {
            w.push_back(parent_[i].second);
            i = parent_[i].first;
        }
        std::reverse(w.begin(), w.end());
        return w;
    }

  private:
    const GammaCtx& Ga_;
    std::vector<GammaElt> gens_;
    std::vector<GammaElt> elems_;
    std::unordered_map<uint64_t, size_t> index_;
    std::vector<std::pair<uint32_t, uint32_t>> parent_;
};

/// Weight action on coordinates: sigma factors through Gamma_K, so an
/// arbitrary K-element acts by its reduction written as a generator word.
class WeightAction {
  public:
    WeightAction(const GammaCtx& Ga, const SpunWeight& W, const GammaWordTable& words)
        : Ga_(Ga), W_(W), words_(words) {}

    size_t dim() const { return W_.mod.dim; }
    const Fq2Field& field() const { return *W_.mod.F; }

    FqVec act(const GroupElement& k, const FqVec& v) const {
        // sigma(g1 g2 ... gl) v = M(g1) M(g2) ... M(gl) v: apply the word
        // right-to-left so that sigma is a homomorphism
        auto w = words_.word(Ga_.reduce(k));
        FqVec r = v;
        for (auto it = w.rbegin(); it != w.rend(); ++it)
            r = fq_apply(field(), W_.mod.gens[*it], r);
        return r;
    }

  private:
    const GammaCtx& Ga_;
    const SpunWeight& W_;
    const GammaWordTable& words_;
};

/// Finitely supported vector of ind_K^G sigma: canonical coset keys of
/// G/K mapped to (canonical representative, value in sigma).
struct CIVector {
    std::map<std::vector<uint64_t>, std::pair<GroupElement, FqVec>> terms;
};

class CompactInduction {
  public:
    CompactInduction(const Decomposer& D, const GammaCtx& Ga, const WeightAction& sigma,
                     CompactLabel K)
        : D_(D), G_(D.group()), Ga_(Ga), sigma_(sigma), K_(K) {}

    const WeightAction& sigma() const { return sigma_; }
    CompactLabel label() const { return K_; }
    const GroupCtx& group() const { return G_; }

    /// [g, v], normalized to the canonical coset representative.
    CIVector term(const GroupElement& g, const FqVec& v) const {
        CIVector x;
        add_term(x, g, v);
        return x;
    }

    CIVector hat_f(const FqVec& v) const { return term(G_.identity(), v); }

    void add_term(CIVector& x, const GroupElement& g, const FqVec& v) const {
        if (fq_vec_is_zero(sigma_.field(), v)) return;
        auto c = D_.canonical_GK(g, K_);
        FqVec w = sigma_.act(c.corr, v);
        auto it = x.terms.find(c.key);
        if (it == x.terms.end()) {
            x.terms.emplace(c.key, std::pair{c.rep, std::move(w)});
            return;
        }
        const Fq2Field& F = sigma_.field();
        FqVec& cur = it->second.second;
        for (size_t i = 0; i < cur.size(); ++i) cur[i] = F.add(cur[i], w[i]);
        if (fq_vec_is_zero(F, cur)) x.terms.erase(it);
    }

    CIVector add(const CIVector& x, const CIVector& y) const {
        CIVector r = x;
        for (const auto& [k, t] : y.terms) add_term(r, t.first, t.second);
        return r;
    }

    CIVector scale(const CIVector& x, Fq2 s) const {
        const Fq2Field& F = sigma_.field();
        if (F.is_zero(s)) return {};
        CIVector r = x;
        for (auto& [k, t] : r.terms)
            for (auto& c : t.second) c = F.mul(s, c);
        return r;
    }

    CIVector act(const GroupElement& g, const CIVector& x) const {
        CIVector r;
        for (const auto& [k, t] : x.terms) add_term(r, G_.mul(g, t.first), t.second);
        return r;
    }

    bool eq(const CIVector& x, const CIVector& y) const {
        if (x.terms.size() != y.terms.size()) return false;
        for (const auto& [k, t] : x.terms) {
            auto it = y.terms.find(k);
            if (it == y.terms.end() || !(it->second.second == t.second)) return false;
        }
        return true;
    }

  private:
    const Decomposer& D_;
    const GroupCtx& G_;
    const GammaCtx& Ga_;
    const WeightAction& sigma_;
    CompactLabel K_;
};

/// The Hecke operator on hat_f_{v0} (v0 spanning the pro-p fixed line):
/// T hat_f_{v0} = sum over N_{n_K}/N_{n_K+2} of u a^{-1} hat_f_{v0}
///             + lambda * sum over N_{n_K+1}/N_{n_K+2} of beta_K u a^{-1} hat_f_{v0},
/// extended to everything by equivariance through the spin words of sigma.
class HeckeOperator {
  public:
    struct BaseTerm {
        GroupElement g;
        bool with_lambda;
    };

    /// spin_frame: pairs (K-element w, sigma(w) v0) spanning sigma, with
    /// the first frame vector equal to v0 itself.
    HeckeOperator(const CompactInduction& ci, const FqVec& v0, Fq2 lambda,
                  std::vector<std::pair<GroupElement, FqVec>> spin_frame)
        : ci_(ci), v0_(v0), lambda_(lambda), frame_(std::move(spin_frame)) {
        const GroupCtx& G = ci.group();
        const Fq2Field& F = ci.sigma().field();
        auto lc = SOperators::level_constants(ci.label());
        GroupElement ai = G.inv(G.alpha());
        for (const auto& u : G.coset_reps(false, lc.first, 2))
            base_terms_.push_back({G.mul(u, ai), false});
        GroupElement bK = G.beta_K(ci.label());
        for (const auto& u : G.coset_reps(false, lc.first + 1, 1))
            base_terms_.push_back({G.mul(bK, G.mul(u, ai)), true});
        // T hat_f_{v0} assembled from the formula
        for (const auto& bt : base_terms_) {
            FqVec v = v0_;
            if (bt.with_lambda) {
                if (F.is_zero(lambda_)) continue;
                for (auto& c : v) c = F.mul(lambda_, c);
            }
            ci_.add_term(base_image_, bt.g, v);
        }
        size_t d = ci.sigma().dim();
        frame_mat_ = FqMatrix(d, frame_.size());
        for (size_t k = 0; k < frame_.size(); ++k)
            for (size_t i = 0; i < d; ++i) frame_mat_.at(i, k) = frame_[k].second[i];
        for (const auto& [w, vec] : frame_) cached_.push_back(ci_.act(w, base_image_));
    }

    const std::vector<BaseTerm>& base_terms() const { return base_terms_; }
    Fq2 lambda() const { return lambda_; }

    /// T hat_f_{v0} itself.
    const CIVector& base_image() const { return base_image_; }

    /// T of a general vector by linearity and equivariance: each value is
    /// written through the frame sigma(w_k) v0, and T[g, sigma(w_k) v0]
    /// = g w_k * (T hat_f_{v0}).
    CIVector apply(const CIVector& x) const {
        const Fq2Field& F = ci_.sigma().field();
        CIVector out;
        for (const auto& [key, t] : x.terms) {
            FqVec c = solve_frame(t.second);
            for (size_t k = 0; k < c.size(); ++k) {
                if (F.is_zero(c[k])) continue;
                CIVector part = ci_.act(t.first, ci_.scale(cached_[k], c[k]));
                out = ci_.add(out, part);
            }
        }
        return out;
    }

  private:
    /// Express a sigma vector through the frame columns (Gaussian solve).
    FqVec solve_frame(const FqVec& v) const {
        const Fq2Field& F = ci_.sigma().field();
        size_t d = ci_.sigma().dim(), r = frame_.size();
        FqMatrix A(d, r + 1);
        for (size_t i = 0; i < d; ++i) {
            for (size_t k = 0; k < r; ++k) A.at(i, k) = frame_mat_.at(i, k);
            A.at(i, r) = v[i];
        }
        std::vector<int64_t> pivot_of_col(r, -1);
        size_t row = 0;
        for (size_t c = 0; c < r && row < d; ++c) {
            size_t sel = row;
            while (sel < d && F.is_zero(A.at(sel, c))) ++sel;
            if (sel == d) continue;
            for (size_t j = 0; j <= r; ++j) std::swap(A.at(sel, j), A.at(row, j));
            Fq2 s = F.inv(A.at(row, c));
            for (size_t j = 0; j <= r; ++j) A.at(row, j) = F.mul(s, A.at(row, j));
            for (size_t i = 0; i < d; ++i) {
                if (i == row) continue;
                Fq2 cc = A.at(i, c);
                if (F.is_zero(cc)) continue;
                for (size_t j = 0; j <= r; ++j)
                    A.at(i, j) = F.sub(A.at(i, j), F.mul(cc, A.at(row, j)));
            }
            pivot_of_col[c] = int64_t(row);
            ++row;
        }
        for (size_t i = row; i < d; ++i)
            if (!F.is_zero(A.at(i, r))) throw Error("vector outside the sigma frame");
        FqVec c(r, F.zero());
        for (size_t k = 0; k < r; ++k)
            if (pivot_of_col[k] >= 0) c[k] = A.at(size_t(pivot_of_col[k]), r);
        return c;
    }

    const CompactInduction& ci_;
    FqVec v0_;
    Fq2 lambda_;
    std::vector<BaseTerm> base_terms_;
    CIVector base_image_;
    std::vector<std::pair<GroupElement, FqVec>> frame_;  // (K lift, sigma(w) v0)
    FqMatrix frame_mat_;
    std::vector<CIVector> cached_;  // w_k * base_image
};

/// Presentation object for the quotient ind_K^G sigma / (T - mu): a vector
/// together with an ideal-membership witness y with x = (T - mu) y.
struct PresentedVector {
    CIVector rep;
    std::optional<CIVector> witness;
};

inline bool verify_presentation(const CompactInduction& ci, const HeckeOperator& T, Fq2 mu,
                                const PresentedVector& p) {
    if (!p.witness) return true;
    const Fq2Field& F = ci.sigma().field();
    CIVector img = T.apply(*p.witness);
    img = ci.add(img, ci.scale(*p.witness, F.neg(mu)));
    return ci.eq(img, p.rep);
}

}  // namespace u21
