#pragma once

// Dense linear algebra over F_{q^2} at desk scale: row echelon closure,
// kernels, spinning (smallest action-stable subspace), and a weighted
// union-find for cocycle-consistent fixed spaces of permutation actions.

#include <cstdint>
#include <optional>
#include <vector>

#include "u21/errors.hpp"
#include "u21/fq.hpp"

namespace u21 {

using FqVec = std::vector<Fq2>;

struct FqMatrix {
    size_t rows = 0, cols = 0;
    std::vector<Fq2> a;

    FqMatrix() = default;
    FqMatrix(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
    Fq2& at(size_t i, size_t j) { return a[i * cols + j]; }
    const Fq2& at(size_t i, size_t j) const { return a[i * cols + j]; }
};

inline FqMatrix fq_identity(const Fq2Field& F, size_t n) {
    FqMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = F.one();
    return m;
}

inline FqMatrix fq_mul(const Fq2Field& F, const FqMatrix& x, const FqMatrix& y) {
    if (x.cols != y.rows) throw Error("matrix dims");
    FqMatrix r(x.rows, y.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = 0; k < x.cols; ++k) {
            Fq2 xv = x.at(i, k);
            if (F.is_zero(xv)) continue;
            for (size_t j = 0; j < y.cols; ++j)
                r.at(i, j) = F.add(r.at(i, j), F.mul(xv, y.at(k, j)));
        }
    return r;
}

inline FqVec fq_apply(const Fq2Field& F, const FqMatrix& m, const FqVec& v) {
    if (m.cols != v.size()) throw Error("matrix/vector dims");
    FqVec r(m.rows, F.zero());
    for (size_t i = 0; i < m.rows; ++i) {
        Fq2 s = F.zero();
        for (size_t j = 0; j < m.cols; ++j) s = F.add(s, F.mul(m.at(i, j), v[j]));
        r[i] = s;
    }
    return r;
}

inline FqMatrix fq_transpose(const FqMatrix& m) {
    FqMatrix r(m.cols, m.rows);
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j) r.at(j, i) = m.at(i, j);
    return r;
}

inline bool fq_vec_is_zero(const Fq2Field& F, const FqVec& v) {
    for (const Fq2& e : v)
        if (!F.is_zero(e)) return false;
    return true;
}

/// Incremental row-echelon basis of a subspace of F^n.
class EchelonBasis {
  public:
    EchelonBasis(const Fq2Field& F, size_t n) : F_(F), n_(n) {}

    size_t dim() const { return rows_.size(); }
    size_t ambient() const { return n_; }
    const std::vector<FqVec>& rows() const { return rows_; }

    /// Reduce v against the basis; returns the残 residual (zero if in span).
    FqVec reduce(FqVec v) const {
        for (size_t r = 0; r < rows_.size(); ++r) {
            Fq2 c = v[pivots_[r]];
            if (F_.is_zero(c)) continue;
            for (size_t j = 0; j < n_; ++j)
                v[j] = F_.sub(v[j], F_.mul(c, rows_[r][j]));
        }
        return v;
    }

    bool contains(const FqVec& v) const { return fq_vec_is_zero(F_, reduce(v)); }

    /// Insert a vector; returns true if it enlarged the span.
    bool insert(FqVec v) {
        v = reduce(std::move(v));
        size_t p = 0;
        while (p < n_ && F_.is_zero(v[p])) ++p;
        if (p == n_) return false;
        Fq2 s = F_.inv(v[p]);
        for (size_t j = 0; j < n_; ++j) v[j] = F_.mul(s, v[j]);
        // back-substitute to keep reduced form
        for (size_t r = 0; r < rows_.size(); ++r) {
            Fq2 c = rows_[r][p];
            if (F_.is_zero(c)) continue;
            for (size_t j = 0; j < n_; ++j)
                rows_[r][j] = F_.sub(rows_[r][j], F_.mul(c, v[j]));
        }
        size_t pos = 0;
        while (pos < pivots_.size() && pivots_[pos] < p) ++pos;
        rows_.insert(rows_.begin() + pos, std::move(v));
        pivots_.insert(pivots_.begin() + pos, p);
        return true;
    }

  private:
    const Fq2Field& F_;
    size_t n_;
    std::vector<FqVec> rows_;
    std::vector<size_t> pivots_;
};

/// Kernel basis of m (viewed as a map F^cols -> F^rows).
inline std::vector<FqVec> fq_kernel(const Fq2Field& F, FqMatrix m) {
    size_t rows = m.rows, cols = m.cols;
    std::vector<size_t> pivot_col;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t sel = r;
        while (sel < rows && F.is_zero(m.at(sel, c))) ++sel;
        if (sel == rows) continue;
        for (size_t j = 0; j < cols; ++j) std::swap(m.at(sel, j), m.at(r, j));
        Fq2 s = F.inv(m.at(r, c));
        for (size_t j = 0; j < cols; ++j) m.at(r, j) = F.mul(s, m.at(r, j));
        for (size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            Fq2 cc = m.at(i, c);
            if (F.is_zero(cc)) continue;
            for (size_t j = 0; j < cols; ++j)
                m.at(i, j) = F.sub(m.at(i, j), F.mul(cc, m.at(r, j)));
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (size_t c : pivot_col) is_pivot[c] = true;
    std::vector<FqVec> ker;
    for (size_t c = 0; c < cols; ++c) {
        if (is_pivot[c]) continue;
        FqVec v(cols, F.zero());
        v[c] = F.one();
        for (size_t i = 0; i < pivot_col.size(); ++i)
            v[pivot_col[i]] = F.neg(m.at(i, c));
        ker.push_back(std::move(v));
    }
    return ker;
}

inline size_t fq_rank(const Fq2Field& F, const FqMatrix& m) {
    return m.cols - fq_kernel(F, m).size();
}

/// A finitely generated module: ambient dimension plus action matrices
/// for a generating set.
struct FiniteModule {
    const Fq2Field* F = nullptr;
    size_t dim = 0;
    std::vector<FqMatrix> gens;
};

/// Smallest action-stable subspace containing the seed vectors (row basis).
inline EchelonBasis spin(const FiniteModule& M, const std::vector<FqVec>& seeds) {
    EchelonBasis basis(*M.F, M.dim);
    std::vector<FqVec> frontier;
    for (const FqVec& s : seeds)
        if (basis.insert(s)) frontier.push_back(s);
    size_t head = 0;
    while (head < frontier.size()) {
        FqVec v = frontier[head++];
        for (const FqMatrix& g : M.gens) {
            FqVec w = fq_apply(*M.F, g, v);
            if (basis.insert(w)) frontier.push_back(std::move(w));
        }
    }
    return basis;
}

/// Fixed space of the module under a list of generators: solves
/// (g - 1)v = 0 simultaneously by stacking.
inline std::vector<FqVec> fixed_space(const FiniteModule& M, const std::vector<FqMatrix>& gens) {
    const Fq2Field& F = *M.F;
    FqMatrix stacked(gens.size() * M.dim, M.dim);
    size_t row = 0;
    for (const FqMatrix& g : gens) {
        for (size_t i = 0; i < M.dim; ++i, ++row)
            for (size_t j = 0; j < M.dim; ++j)
                stacked.at(row, j) = F.sub(g.at(i, j), i == j ? F.one() : F.zero());
    }
    return fq_kernel(F, stacked);
}

/// Weighted union-find over F^x: constraints f_i = s f_j.  Components with
/// inconsistent cocycles are forced to zero.  Yields a basis of the
/// solution space of all constraints.
class CocycleSolver {
  public:
    CocycleSolver(const Fq2Field& F, size_t n)
        : F_(F), parent_(n), rel_(n, F.one()), zero_(n, false) {
        for (size_t i = 0; i < n; ++i) parent_[i] = i;
    }

    /// Add constraint f_i = s * f_j.
    void relate(size_t i, size_t j, Fq2 s) {
        auto [ri, wi] = find(i);
        auto [rj, wj] = find(j);
        // f_i = wi f_ri, f_j = wj f_rj; want wi f_ri = s wj f_rj
        if (ri == rj) {
            if (!(wi == F_.mul(s, wj))) zero_[ri] = true;
            return;
        }
        parent_[ri] = rj;
        rel_[ri] = F_.mul(F_.inv(wi), F_.mul(s, wj));
        if (zero_[ri]) zero_[rj] = true;
    }

    /// Force f_i = 0.
    void annihilate(size_t i) { zero_[find(i).first] = true; }

    /// Basis of consistent solutions as vectors of length n.
    std::vector<FqVec> solution_basis() {
        size_t n = parent_.size();
        std::vector<std::pair<size_t, Fq2>> root(n);
        for (size_t i = 0; i < n; ++i) root[i] = find(i);
        // propagate zero flags to final roots
        std::vector<FqVec> out;
        for (size_t r = 0; r < n; ++r) {
            if (root[r].first != r || zero_[r]) continue;
            FqVec v(n, F_.zero());
            bool any = false;
            for (size_t i = 0; i < n; ++i)
                if (root[i].first == r) {
                    v[i] = root[i].second;
                    any = true;
                }
            if (any) out.push_back(std::move(v));
        }
        return out;
    }

  private:
    // invariant: f_i = rel_[i] * f_{parent_[i]}; roots carry rel one
    std::pair<size_t, Fq2> find(size_t i) {
        if (parent_[i] == i) return {i, F_.one()};
        auto [r, w] = find(parent_[i]);
        rel_[i] = F_.mul(rel_[i], w);
        parent_[i] = r;
        return {r, rel_[i]};
    }

    const Fq2Field& F_;
    std::vector<size_t> parent_;
    std::vector<Fq2> rel_;
    std::vector<bool> zero_;
};

}  // namespace u21
