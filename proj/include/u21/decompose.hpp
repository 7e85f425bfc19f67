#pragma once

// Constructive decompositions in G = U(2,1): Iwasawa G = B K for both
// maximal compacts, the finite Bruhat classification K = (B cap K) I_1K
// u (B cap K) beta_K I_1K with exact witnesses, the two Iwahori
// factorization orders of I_1K, rewriting into B/N' words, and canonical
// representatives for B\G/K_n double cosets and for G/K cosets.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "u21/group.hpp"

namespace u21 {

// ---------- isotropic lines ----------

/// A point of P^2(E) carried by a primitive vector over o_E (content 0).
struct Line {
    std::array<EElement, 3> v;
    int pivot = 0;  // first coordinate with valuation 0, normalized to 1
};

class Decomposer {
  public:
    explicit Decomposer(const GroupCtx& G) : G_(G), zp_(G.zp()) {}

    const GroupCtx& group() const { return G_; }

    /// The isotropic line g^{-1} <e1>, primitivized and pivot-normalized.
    Line line_of(const GroupElement& g) const {
        GroupElement gi = G_.inv(g);
        std::array<EElement, 3> v{gi.m[0], gi.m[3], gi.m[6]};  // first column
        return canonical_line(v);
    }

    Line canonical_line(std::array<EElement, 3> v) const {
        int32_t content = INT32_MAX;
        for (const auto& e : v)
            if (!zp_.is_zero(e)) content = std::min(content, e.val);
        if (content == INT32_MAX) throw Error("zero vector has no line");
        for (auto& e : v) e = zp_.shift(e, -content);
        int pivot = 0;
        while (pivot < 3 && (v[pivot].zero || v[pivot].val != 0)) ++pivot;
        if (pivot == 3) throw Error("no unit pivot in primitive vector");
        EElement s = zp_.inv(v[pivot]);
        for (auto& e : v) e = zp_.mul(s, e);
        return Line{v, pivot};
    }

    /// Packed key of a line mod p^n (for coset hashing).
    uint64_t line_key(const Line& L, uint32_t n) const {
        uint64_t base = zp_.p_pow(n);
        uint64_t key = uint64_t(L.pivot);
        for (const auto& e : L.v) {
            auto [a, b] = integral_digits(e, n);
            key = key * base + a;
            key = key * base + b;
        }
        return key;
    }

    uint64_t line_key_of(const GroupElement& g, uint32_t n) const {
        return line_key(line_of(g), n);
    }

    bool line_isotropic(const Line& L) const {
        // v^T beta conj(v) = tr(v1 conj(v3)) + norm(v2)
        EElement s = zp_.add(zp_.trace(zp_.mul(L.v[0], zp_.conj(L.v[2]))), zp_.norm(L.v[1]));
        return zp_.is_zero(s);
    }

    // ---------- Iwasawa ----------

    struct BK {
        GroupElement b, k;
    };

    /// g = b k with b upper triangular in G and k in K.  Deterministic:
    /// the pivot of the line and the completion choices follow a fixed
    /// minimal-valuation-first scan.
    BK iwasawa(const GroupElement& g, CompactLabel K) const {
        SubgroupTag tag = (K == CompactLabel::K0) ? SubgroupTag::K0 : SubgroupTag::K1;
        if (G_.member(g, tag)) return {G_.identity(), g};
        if (G_.member(g, SubgroupTag::B)) return {g, G_.identity()};
        if (K == CompactLabel::K0) return iwasawa0(g);
        // K1 via K0 plus the finite Bruhat cell of the K0 part:
        // beta = alpha^{-1} beta' moves the big cell into B K1.
        BK d0 = iwasawa0(g);
        Bruhat c = bruhat_classify(d0.k, CompactLabel::K0);
        if (!c.big_cell) {
            // k0 = b' i with i in K0^1 subset K1
            GroupElement b = G_.mul(d0.b, c.b);
            GroupElement k = G_.mul(G_.inv(c.b), d0.k);
            return {b, k};
        }
        GroupElement b = G_.mul(G_.mul(d0.b, c.b), G_.inv(G_.alpha()));
        GroupElement k = G_.mul(G_.inv(G_.mul(c.b, G_.inv(G_.alpha()))), d0.k);
        return {b, k};
    }

    // ---------- finite Bruhat classification in K ----------

    struct Bruhat {
        bool big_cell;      // false: k = b i ; true: k = b beta_K i
        GroupElement b, i;  // b in B cap K, i in I_{1,K}
    };

    Bruhat bruhat_classify(const GroupElement& k, CompactLabel K) const {
        SubgroupTag tag = (K == CompactLabel::K0) ? SubgroupTag::K0 : SubgroupTag::K1;
        if (!G_.member(k, tag)) throw NotInK("bruhat_classify");
        if (G_.member(k, SubgroupTag::I1K, K)) return {false, G_.identity(), k};
        if (in_small_cell(k, K)) {
            GroupElement b = borel_lift(k, K);
            GroupElement i = G_.mul(G_.inv(b), k);
            return {false, b, i};
        }
        // big cell: read the residual unipotent from the bottom row
        GroupElement u0 = big_cell_unipotent(k, K);
        GroupElement bk = G_.beta_K(K);
        GroupElement m = G_.mul(G_.mul(k, G_.inv(u0)), G_.inv(bk));
        GroupElement b = borel_lift(m, K);
        GroupElement i0 = G_.mul(G_.inv(b), m);  // in K^1
        GroupElement i = G_.mul(G_.mul(G_.inv(bk), G_.mul(i0, bk)), u0);
        return {true, b, i};
    }

    // ---------- Iwahori factorization ----------

    enum class Order { BNprime, NprimeB };

    struct IwahoriFactors {
        GroupElement first, second;
    };

    /// I_{1,K} = (I_{1,K} cap B) N'_{m_K} = N'_{m_K} (I_{1,K} cap B),
    /// both orders exact.
    IwahoriFactors iwahori_factor(const GroupElement& i, CompactLabel K, Order order) const {
        if (!G_.member(i, SubgroupTag::I1K, K)) throw NotInProPIwahori();
        int32_t m_K = (K == CompactLabel::K0) ? 1 : 2;
        const Mat3& g = i.m;
        if (order == Order::BNprime) {
            // peel u' from the right: conditions on the bottom row
            EElement i33i = zp_.inv(g[8]);
            EElement xb = zp_.neg(zp_.mul(g[7], i33i));                       // conj(x)
            EElement x = zp_.conj(xb);
            EElement yb = zp_.mul(zp_.sub(zp_.mul(g[7], x), zp_.mul(g[6], zp_.one())), i33i);
            EElement y = zp_.conj(yb);
            GroupElement up = G_.make_nprime(x, y);
            if (!G_.member(up, SubgroupTag::Npk, K, m_K))
                throw NotInProPIwahori();
            GroupElement b = G_.mul(i, G_.inv(up));
            if (!G_.member(b, SubgroupTag::B)) throw Error("iwahori BN': B part not upper");
            return {b, up};
        }
        // peel u' from the left: 2x2 linear solve on the bottom row
        EElement det = zp_.sub(zp_.mul(g[0], g[4]), zp_.mul(g[3], g[1]));
        EElement deti = zp_.inv(det);
        EElement yb = zp_.mul(zp_.sub(zp_.mul(g[3], g[7]), zp_.mul(g[6], g[4])), deti);
        EElement xb = zp_.mul(zp_.sub(zp_.mul(g[6], g[1]), zp_.mul(g[0], g[7])), deti);
        EElement x = zp_.conj(xb);
        EElement y = zp_.conj(yb);
        GroupElement up = G_.make_nprime(x, y);
        if (!G_.member(up, SubgroupTag::Npk, K, m_K)) throw NotInProPIwahori();
        GroupElement b = G_.mul(G_.inv(up), i);
        if (!G_.member(b, SubgroupTag::B)) throw Error("iwahori N'B: B part not upper");
        return {up, b};
    }

    // ---------- B N'_m factorization of general elements ----------

    struct BNprimeFactors {
        GroupElement b, up;
    };

    /// g = b u' with u' in N'_m, when such a factorization exists.
    std::optional<BNprimeFactors> b_nprime_factor(const GroupElement& g, int32_t m) const {
        if (zp_.is_zero(g.m[8])) return std::nullopt;
        EElement i33i = zp_.inv(g.m[8]);
        EElement xb = zp_.neg(zp_.mul(g.m[7], i33i));
        EElement x = zp_.conj(xb);
        EElement yb = zp_.mul(zp_.sub(zp_.mul(g.m[7], x), g.m[6]), i33i);
        EElement y = zp_.conj(yb);
        if (!zp_.satisfies_constraint(x, y)) return std::nullopt;
        GroupElement up = G_.make_nprime(x, y);
        if (!G_.member(up, SubgroupTag::Npk, CompactLabel::K0, m)) return std::nullopt;
        GroupElement b = G_.mul(g, G_.inv(up));
        if (!G_.member(b, SubgroupTag::B)) return std::nullopt;
        return BNprimeFactors{b, up};
    }

    // ---------- words in B and N' ----------

    struct WordFactor {
        bool in_B;  // true: factor lies in B, false: in N'
        GroupElement g;
    };

    /// A word whose product is exactly g, each factor in B or N'.
    std::vector<WordFactor> word_in_B_Nprime(const GroupElement& g) const {
        std::vector<WordFactor> w;
        if (G_.member(g, SubgroupTag::B)) {
            w.push_back({true, g});
            return w;
        }
        BK d = iwasawa(g, CompactLabel::K0);
        w.push_back({true, d.b});
        Bruhat c = bruhat_classify(d.k, CompactLabel::K0);
        w.push_back({true, c.b});
        if (c.big_cell) append_beta_word(w);
        append_iwahori_word(w, c.i, CompactLabel::K0);
        return w;
    }

    GroupElement word_product(const std::vector<WordFactor>& w) const {
        GroupElement g = G_.identity();
        for (const auto& f : w) g = G_.mul(g, f.g);
        return g;
    }

    // ---------- canonical G/K cosets ----------

    struct GKCoset {
        // canonical representative n(x, y) alpha^{-v};  key identifies the
        // coset exactly; corr = rep^{-1} g lies in K.
        GroupElement rep;
        GroupElement corr;
        std::vector<uint64_t> key;
    };

    GKCoset canonical_GK(const GroupElement& g, CompactLabel K) const {
        BK d = iwasawa(g, K);
        // b = n(x,y) diag(a,u,conj(a)^{-1})
        const Mat3& b = d.b.m;
        EElement a = b[0], u = b[4];
        EElement x = zp_.is_zero(b[1]) ? zp_.zero() : zp_.mul(b[1], zp_.inv(u));
        EElement y = zp_.is_zero(b[2]) ? zp_.zero() : zp_.mul(b[2], zp_.conj(a));
        int32_t v = zp_.is_zero(a) ? 0 : a.val;
        // t coordinate: y = -x conj(x)/2 + t sqrt(c)
        EElement tsc = zp_.sub(y, zp_.neg(zp_.halve(zp_.norm(x))));
        EElement t = zp_.is_zero(tsc) ? zp_.zero() : zp_.mul(tsc, zp_.inv(zp_.sqrt_c()));
        // windows: val(x) >= v, val(t) >= 2v (K0) or 2v - 1 (K1).  Moving
        // the x part to its canonical class twists t by the sqrt(c) part
        // of x conj(xc - x) (Heisenberg coordinates), so center t there.
        EElement xc = truncate_below(x, v);
        int32_t tmod = 2 * v - (K == CompactLabel::K1 ? 1 : 0);
        EElement z = zp_.mul(x, zp_.conj(zp_.sub(xc, x)));
        EElement twist = zp_.is_zero(z)
                             ? zp_.zero()
                             : zp_.mul(zp_.halve(zp_.sub(z, zp_.conj(z))), zp_.inv(zp_.sqrt_c()));
        EElement tc = truncate_below(zp_.sub(t, twist), tmod);
        EElement yc = zp_.add(zp_.neg(zp_.halve(zp_.norm(xc))), zp_.mul(tc, zp_.sqrt_c()));
        GroupElement rep = G_.mul(G_.make_n(xc, yc), alpha_pow(-v));
        GroupElement corr = G_.mul(G_.inv(rep), g);
        SubgroupTag tag = (K == CompactLabel::K0) ? SubgroupTag::K0 : SubgroupTag::K1;
        if (!G_.member(corr, tag)) throw Error("canonical_GK: correction not in K");
        std::vector<uint64_t> key;
        key.push_back(uint64_t(int64_t(v) + (int64_t(1) << 20)));
        append_window_digits(key, xc, v);
        append_window_digits(key, tc, tmod);
        return {rep, corr, key};
    }

    GroupElement alpha_pow(int32_t e) const {
        GroupElement a = e >= 0 ? G_.alpha() : G_.inv(G_.alpha());
        GroupElement r = G_.identity();
        for (int32_t i = 0; i < (e >= 0 ? e : -e); ++i) r = G_.mul(r, a);
        return r;
    }

    // ---------- shared lift helpers ----------

    /// Exact element of N with prescribed residual parameters: x residue
    /// rx at valuation vx (vx < 0 allowed); the sqrt(c)-coefficient of y is
    /// tcoef p^vy with tcoef in F_p.  The trace part of y is forced.
    GroupElement n_lift(Fq2 rx, int32_t vx, uint32_t tcoef, int32_t vy) const {
        EElement x = zp_.shift(zp_.from_parts(int64_t(rx.a), int64_t(rx.b)), vx);
        EElement t = zp_.shift(zp_.from_int(int64_t(tcoef)), vy);
        EElement y = zp_.add(zp_.neg(zp_.halve(zp_.norm(x))), zp_.mul(t, zp_.sqrt_c()));
        return G_.make_n(x, y);
    }

  private:
    std::pair<uint64_t, uint64_t> integral_digits(const EElement& e, uint32_t n) const {
        return zp_.digits(e, n);
    }

    /// Zero out all digit positions >= cut (valuation-indexed), keeping the
    /// canonical lift of the class mod p^cut.
    EElement truncate_below(const EElement& e, int32_t cut) const {
        if (zp_.is_zero(e) || e.val >= cut) return zp_.zero();
        uint32_t keep = uint32_t(cut - e.val);
        if (keep >= zp_.N()) keep = zp_.N();  // already canonical at working precision
        uint64_t m = zp_.p_pow(keep);
        EElement r = e;
        r.u.a %= m;
        r.u.b %= m;
        if (r.u.a == 0 && r.u.b == 0) return zp_.zero();
        r.cert = uint8_t(zp_.P());
        return zp_.from_unit(r.val, r.u, r.cert);
    }

    void append_window_digits(std::vector<uint64_t>& key, const EElement& e, int32_t cut) const {
        if (zp_.is_zero(e) || e.val >= cut) {
            key.push_back(0);
            key.push_back(0);
            key.push_back(0);
            return;
        }
        uint32_t keep = std::min<uint32_t>(uint32_t(cut - e.val), zp_.N());
        uint64_t m = zp_.p_pow(keep);
        key.push_back(uint64_t(int64_t(e.val) + (int64_t(1) << 20)));
        key.push_back(e.u.a % m);
        key.push_back(e.u.b % m);
    }

    bool in_small_cell(const GroupElement& k, CompactLabel K) const {
        if (K == CompactLabel::K0)
            return G_.vval(k.m[3]) >= 1 && G_.vval(k.m[6]) >= 1 && G_.vval(k.m[7]) >= 1;
        return G_.vval(k.m[6]) >= 2;
    }

    /// Exact b in B cap K with the same Gamma_K-image as m (requires the
    /// image to lie in the residual Borel).  b = diag lift * N lift; the
    /// quotient b^{-1} m then lies in K^1.
    GroupElement borel_lift(const GroupElement& m, CompactLabel K) const {
        const Fq2Field& F = zp_.residue_field();
        EElement a = zp_.teichmuller(zp_.unit_residue(m.m[0]));
        EElement u = zp_.teichmuller(zp_.unit_residue(m.m[4]));
        GroupElement h = G_.make_diag(a, u);
        if (K == CompactLabel::K0) {
            // residual n-parameters of h^{-1} m
            GroupElement w = G_.mul(G_.inv(h), m);
            Fq2 rx = zp_.residue(w.m[1]);
            Fq2 ry = zp_.residue(w.m[2]);
            // sqrt(c)-coefficient of ry (the trace part is forced)
            return G_.mul(h, n_lift(rx, 0, ry.b, 0));
        }
        GroupElement w = G_.mul(G_.inv(h), m);
        // block upper entry: residue of p * w13 at valuation -1
        EElement py = zp_.shift(w.m[2], 1);
        Fq2 rb = (zp_.is_zero(py) || py.val > 0) ? F.zero() : zp_.residue(py);
        if (rb.a != 0) {
            // trace part of the block entry is forced to zero by residual
            // unitarity; a nonzero value here means m was not in the cell
            throw Error("borel_lift: residual block entry not trace-zero");
        }
        return G_.mul(h, n_lift(F.zero(), 0, rb.b, -1));
    }

    /// Exact u0 in N cap I_{1,K} with gamma(k) in Borel * beta_K * gamma(u0).
    GroupElement big_cell_unipotent(const GroupElement& k, CompactLabel K) const {
        const Fq2Field& F = zp_.residue_field();
        if (K == CompactLabel::K0) {
            // bottom row residues: (g31, g32, g33) = b33 (1, x, y)
            Fq2 r31 = zp_.residue(k.m[6]);
            Fq2 inv31 = F.inv(r31);
            Fq2 rx = F.mul(zp_.residue(k.m[7]), inv31);
            Fq2 ry = F.mul(zp_.residue(k.m[8]), inv31);
            return n_lift(rx, 0, ry.b, 0);
        }
        // block bottom row: (z, s) = s' (1, w), w = s/z at valuation -1
        EElement z = zp_.shift(k.m[6], -1);  // p^{-1} g31, a unit in the big cell
        Fq2 rz = zp_.residue(z);
        Fq2 rs = zp_.residue(k.m[8]);
        Fq2 w = F.mul(rs, F.inv(rz));
        return n_lift(F.zero(), 0, w.b, -1);
    }

    BK iwasawa0(const GroupElement& g) const {
        Line L = line_of(g);
        GroupElement M = complete_unitary(L);
        GroupElement b = G_.mul(g, M);
        if (!G_.member(b, SubgroupTag::B)) throw Error("iwasawa: completion failed");
        return {b, G_.inv(M)};
    }

    /// M in K0 whose first column spans the given primitive isotropic line.
    GroupElement complete_unitary(const Line& L) const {
        auto h = [&](const std::array<EElement, 3>& x, const std::array<EElement, 3>& y) {
            EElement s = zp_.zero();
            s = zp_.add(s, zp_.mul(x[0], zp_.conj(y[2])));
            s = zp_.add(s, zp_.mul(x[1], zp_.conj(y[1])));
            s = zp_.add(s, zp_.mul(x[2], zp_.conj(y[0])));
            return s;
        };
        std::array<EElement, 3> c1 = L.v;
        // dual vector: first basis vector pairing to a unit with c1
        std::array<std::array<EElement, 3>, 3> basis;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) basis[i][j] = (i == j) ? zp_.one() : zp_.zero();
        }
        int w0 = -1;
        for (int i = 0; i < 3; ++i) {
            EElement pairing = h(c1, basis[i]);
            if (!zp_.is_zero(pairing) && pairing.val == 0) { w0 = i; break; }
        }
        if (w0 < 0) throw Error("complete_unitary: no unit pairing");
        EElement u0 = h(c1, basis[w0]);
        EElement lam = zp_.conj(zp_.inv(u0));
        std::array<EElement, 3> w1;
        for (int j = 0; j < 3; ++j) w1[j] = zp_.mul(lam, basis[w0][j]);
        // make w1 isotropic: c3 = w1 - (h(w1,w1)/2) c1  (h(w1,w1) lies in F)
        EElement s = h(w1, w1);
        EElement mu = zp_.is_zero(s) ? zp_.zero() : zp_.halve(s);
        std::array<EElement, 3> c3;
        for (int j = 0; j < 3; ++j) c3[j] = zp_.sub(w1[j], zp_.mul(mu, c1[j]));
        // middle vector: first basis vector whose projection has unit length
        for (int i = 0; i < 3; ++i) {
            EElement l1 = h(basis[i], c3);
            EElement l2 = h(basis[i], c1);
            std::array<EElement, 3> z;
            for (int j = 0; j < 3; ++j)
                z[j] = zp_.sub(basis[i][j], zp_.add(zp_.mul(l1, c1[j]), zp_.mul(l2, c3[j])));
            EElement nu = h(z, z);
            if (zp_.is_zero(nu) || nu.val != 0) continue;
            EElement t = zp_.solve_norm(zp_.inv(nu));
            Mat3 m;
            for (int j = 0; j < 3; ++j) {
                m[3 * j + 0] = c1[j];
                m[3 * j + 1] = zp_.mul(t, z[j]);
                m[3 * j + 2] = c3[j];
            }
            return G_.certify(m, "complete_unitary");
        }
        throw Error("complete_unitary: no unit-length complement vector");
    }

    void append_beta_word(std::vector<WordFactor>& w) const {
        // beta = n(0, z^{-1}) h(conj(z)^{-1}) n'(0, z^{-1}) n(0, -z) for any
        // trace-zero unit z (rearranged identity (1) at x = 0); z = sqrt(c).
        EElement z = zp_.sqrt_c();
        EElement zi = zp_.inv(z);
        GroupElement b1 = G_.mul(G_.make_n(zp_.zero(), zi), G_.make_h(zp_.inv(zp_.conj(z))));
        w.push_back({true, b1});
        w.push_back({false, G_.make_nprime(zp_.zero(), zi)});
        w.push_back({true, G_.make_n(zp_.zero(), zp_.neg(z))});
    }

    void append_iwahori_word(std::vector<WordFactor>& w, const GroupElement& i,
                             CompactLabel K) const {
        IwahoriFactors f = iwahori_factor(i, K, Order::BNprime);
        w.push_back({true, f.first});
        w.push_back({false, f.second});
    }

    const GroupCtx& G_;
    const Padic& zp_;
};

}  // namespace u21
