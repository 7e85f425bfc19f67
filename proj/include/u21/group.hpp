#pragma once

// The unitary group G = U(2,1)(E/F) as certified 3x3 matrices over E,
// its named elements (n(x,y), n'(x,y), h(x), alpha, beta, beta'), the
// congruence/Iwahori subgroup membership tests, filtration coset
// representatives, and the identity beta n(x,y) = n(..) h(..) n'(..).

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "u21/errors.hpp"
#include "u21/padic.hpp"

namespace u21 {

using Mat3 = std::array<EElement, 9>;

enum class CompactLabel { K0, K1 };

enum class SubgroupTag {
    K0,        // first maximal compact
    K1,        // second maximal compact
    K0p,       // maximal normal pro-p subgroup of K0
    K1p,       // maximal normal pro-p subgroup of K1
    IK,        // Iwahori of K (use the K parameter)
    I1K,       // pro-p Iwahori of K
    Nk,        // N_k (use the k parameter)
    Npk,       // N'_k
    B,         // upper triangular Borel
    H,         // diagonal torus
    N,         // upper unipotent radical
    Nprime,    // lower unipotent radical
    Kn,        // principal congruence subgroup of K0 at level n
};

struct GroupElement {
    Mat3 m;
};

class GroupCtx {
  public:
    GroupCtx() = default;
    explicit GroupCtx(Padic zp) : zp_(std::move(zp)) {}

    const Padic& zp() const { return zp_; }
    uint64_t q() const { return zp_.p(); }

    // ---- matrix plumbing ----

    Mat3 mat_identity() const {
        Mat3 r;
        for (auto& e : r) e = zp_.zero();
        r[0] = r[4] = r[8] = zp_.one();
        return r;
    }

    Mat3 mat_mul(const Mat3& x, const Mat3& y) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                EElement s = zp_.zero();
                for (int k = 0; k < 3; ++k)
                    s = zp_.add(s, zp_.mul(x[3 * i + k], y[3 * k + j]));
                r[3 * i + j] = s;
            }
        return r;
    }

    Mat3 mat_conj_transpose(const Mat3& x) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r[3 * i + j] = zp_.conj(x[3 * j + i]);
        return r;
    }

    bool mat_eq(const Mat3& x, const Mat3& y) const {
        for (int i = 0; i < 9; ++i)
            if (!zp_.eq(x[i], y[i])) return false;
        return true;
    }

    EElement mat_det(const Mat3& g) const {
        auto& z = zp_;
        EElement d = z.zero();
        d = z.add(d, z.mul(g[0], z.sub(z.mul(g[4], g[8]), z.mul(g[5], g[7]))));
        d = z.sub(d, z.mul(g[1], z.sub(z.mul(g[3], g[8]), z.mul(g[5], g[6]))));
        d = z.add(d, z.mul(g[2], z.sub(z.mul(g[3], g[7]), z.mul(g[4], g[6]))));
        return d;
    }

    /// The antidiagonal form matrix.
    Mat3 form_matrix() const {
        Mat3 b;
        for (auto& e : b) e = zp_.zero();
        b[2] = b[4] = b[6] = zp_.one();
        return b;
    }

    /// g^T beta conj(g) == beta at working precision.
    bool is_unitary(const Mat3& g) const {
        Mat3 gt;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) gt[3 * i + j] = g[3 * j + i];
        Mat3 gc;
        for (int i = 0; i < 9; ++i) gc[i] = zp_.conj(g[i]);
        return mat_eq(mat_mul(mat_mul(gt, form_matrix()), gc), form_matrix());
    }

    // ---- certified elements ----

    GroupElement certify(const Mat3& m, const char* ctx = "certify") const {
        if (!is_unitary(m)) throw ConstraintViolation(ctx);
        return GroupElement{m};
    }

    GroupElement identity() const { return GroupElement{mat_identity()}; }

    GroupElement mul(const GroupElement& x, const GroupElement& y) const {
        return GroupElement{mat_mul(x.m, y.m)};
    }

    /// Exact inverse: g^{-1} = beta conj(g)^T beta.
    GroupElement inv(const GroupElement& g) const {
        return GroupElement{mat_mul(mat_mul(form_matrix(), mat_conj_transpose(g.m)), form_matrix())};
    }

    bool eq(const GroupElement& x, const GroupElement& y) const { return mat_eq(x.m, y.m); }

    // ---- named elements ----

    GroupElement make_n(const EElement& x, const EElement& y) const {
        if (!zp_.satisfies_constraint(x, y))
            throw ConstraintViolation("n(x,y): x conj(x) + y + conj(y) != 0");
        Mat3 m = mat_identity();
        m[1] = x;
        m[2] = y;
        m[5] = zp_.neg(zp_.conj(x));
        return GroupElement{m};
    }

    GroupElement make_nprime(const EElement& x, const EElement& y) const {
        if (!zp_.satisfies_constraint(x, y))
            throw ConstraintViolation("n'(x,y): x conj(x) + y + conj(y) != 0");
        Mat3 m = mat_identity();
        m[3] = x;
        m[6] = y;
        m[7] = zp_.neg(zp_.conj(x));
        return GroupElement{m};
    }

    GroupElement make_h(const EElement& x) const {
        if (zp_.is_zero(x)) throw ConstraintViolation("h(x): x must be nonzero");
        Mat3 m = mat_identity();
        m[0] = x;
        m[4] = zp_.neg(zp_.mul(zp_.conj(x), zp_.inv(x)));
        m[8] = zp_.inv(zp_.conj(x));
        return GroupElement{m};
    }

    /// General torus element diag(a, u, conj(a)^{-1}) with u conj(u) = 1.
    GroupElement make_diag(const EElement& a, const EElement& u) const {
        if (zp_.is_zero(a)) throw ConstraintViolation("diag: a must be nonzero");
        if (!zp_.eq(zp_.norm(u), zp_.one())) throw ConstraintViolation("diag: u not norm-one");
        Mat3 m = mat_identity();
        m[0] = a;
        m[4] = u;
        m[8] = zp_.inv(zp_.conj(a));
        return GroupElement{m};
    }

    GroupElement alpha() const {
        Mat3 m = mat_identity();
        m[0] = zp_.uniformizer_pow(-1);
        m[8] = zp_.uniformizer_pow(1);
        return GroupElement{m};
    }

    GroupElement beta() const { return GroupElement{form_matrix()}; }

    GroupElement beta_prime() const { return mul(beta(), inv(alpha())); }

    GroupElement beta_K(CompactLabel K) const {
        return K == CompactLabel::K0 ? beta() : beta_prime();
    }

    // ---- parameter extraction ----

    /// (x, y) of an element of N.
    std::pair<EElement, EElement> n_params(const GroupElement& g) const {
        return {g.m[1], g.m[2]};
    }
    std::pair<EElement, EElement> nprime_params(const GroupElement& g) const {
        return {g.m[3], g.m[6]};
    }

    // ---- valuation helpers ----

    /// val(e) with zero treated as +infinity (capped).
    int32_t vval(const EElement& e) const { return e.zero ? INT32_MAX / 2 : e.val; }

    // ---- membership ----

    bool member(const GroupElement& g, SubgroupTag tag, CompactLabel K = CompactLabel::K0,
                int32_t k = 0) const {
        const Mat3& m = g.m;
        auto v = [&](int i) { return vval(m[i]); };
        switch (tag) {
            case SubgroupTag::K0: {
                for (int i = 0; i < 9; ++i)
                    if (v(i) < 0) return false;
                return true;
            }
            case SubgroupTag::K1:
                return v(0) >= 0 && v(1) >= 0 && v(2) >= -1 && v(3) >= 1 && v(4) >= 0 &&
                       v(5) >= 0 && v(6) >= 1 && v(7) >= 1 && v(8) >= 0;
            case SubgroupTag::K0p: {
                Mat3 d = m;
                d[0] = zp_.sub(m[0], zp_.one());
                d[4] = zp_.sub(m[4], zp_.one());
                d[8] = zp_.sub(m[8], zp_.one());
                for (int i = 0; i < 9; ++i)
                    if (vval(d[i]) < 1) return false;
                return true;
            }
            case SubgroupTag::K1p: {
                auto dv = [&](int i) { return vval(zp_.sub(m[i], zp_.one())); };
                return dv(0) >= 1 && v(1) >= 0 && v(2) >= 0 && v(3) >= 1 && dv(4) >= 1 &&
                       v(5) >= 0 && v(6) >= 2 && v(7) >= 1 && dv(8) >= 1;
            }
            case SubgroupTag::IK: {
                if (K == CompactLabel::K0)
                    return member(g, SubgroupTag::K0) && v(3) >= 1 && v(6) >= 1 && v(7) >= 1;
                return member(g, SubgroupTag::K1) && v(6) >= 2;
            }
            case SubgroupTag::I1K: {
                if (!member(g, SubgroupTag::IK, K)) return false;
                auto res_one = [&](int i) {
                    return v(i) == 0 && zp_.residue_field().is_zero(zp_.residue_field().sub(
                                            zp_.unit_residue(m[i]), zp_.residue_field().one()));
                };
                return res_one(0) && res_one(4) && res_one(8);
            }
            case SubgroupTag::B:
                return m[3].zero && m[6].zero && m[7].zero;
            case SubgroupTag::H:
                return m[1].zero && m[2].zero && m[3].zero && m[5].zero && m[6].zero && m[7].zero;
            case SubgroupTag::N: {
                if (!(m[3].zero && m[6].zero && m[7].zero)) return false;
                if (!(zp_.eq(m[0], zp_.one()) && zp_.eq(m[4], zp_.one()) && zp_.eq(m[8], zp_.one())))
                    return false;
                return zp_.eq(m[5], zp_.neg(zp_.conj(m[1])));
            }
            case SubgroupTag::Nprime: {
                if (!(m[1].zero && m[2].zero && m[5].zero)) return false;
                if (!(zp_.eq(m[0], zp_.one()) && zp_.eq(m[4], zp_.one()) && zp_.eq(m[8], zp_.one())))
                    return false;
                return zp_.eq(m[7], zp_.neg(zp_.conj(m[3])));
            }
            case SubgroupTag::Nk:
                return member(g, SubgroupTag::N) && vval(m[2]) >= k;
            case SubgroupTag::Npk:
                return member(g, SubgroupTag::Nprime) && vval(m[6]) >= k;
            case SubgroupTag::Kn: {
                Mat3 d = m;
                d[0] = zp_.sub(m[0], zp_.one());
                d[4] = zp_.sub(m[4], zp_.one());
                d[8] = zp_.sub(m[8], zp_.one());
                for (int i = 0; i < 9; ++i)
                    if (vval(d[i]) < k) return false;
                return true;
            }
        }
        return false;
    }

    // ---- filtration coset representatives ----

    /// Complete irredundant representatives of N_k/N_{k+j} (or N'), in the
    /// canonical order: (a,b)-lift of the x window ascending, then the
    /// hermitian solution list for that x.
    std::vector<GroupElement> coset_reps(bool primed, int32_t k, uint32_t j) const {
        std::vector<GroupElement> out;
        int32_t xlo = (k >= 0) ? (k + 1) / 2 : -((-k) / 2);       // ceil(k/2)
        int32_t xhi = (k + int32_t(j) >= 0) ? (k + int32_t(j) + 1) / 2
                                            : -((-(k + int32_t(j))) / 2);
        uint32_t d = uint32_t(xhi - xlo);
        uint64_t span = 1;
        for (uint32_t i = 0; i < d; ++i) span *= zp_.p();
        for (uint64_t a = 0; a < span; ++a)
            for (uint64_t b = 0; b < span; ++b) {
                EElement x = zp_.shift(zp_.from_parts(int64_t(a), int64_t(b)), xlo);
                // q^j trace-compatible y classes with val(y) >= k for this x
                for (const EElement& y : zp_.hermitian_solutions(x, k, j))
                    out.push_back(primed ? make_nprime(x, y) : make_n(x, y));
            }
        return out;
    }

    // ---- eq. (1) ----

    /// beta n(x,y) = n(conj(y)^{-1} x, y^{-1}) h(conj(y)^{-1}) n'(-conj(y)^{-1} conj(x), y^{-1}).
    struct Eq1Factors {
        GroupElement n1, h1, np1;
    };

    Eq1Factors eq1_factor(const EElement& x, const EElement& y) const {
        if (zp_.is_zero(y)) throw ZeroY();
        if (!zp_.satisfies_constraint(x, y))
            throw ConstraintViolation("eq1_factor: invalid (x,y)");
        EElement ybi = zp_.inv(zp_.conj(y));  // conj(y)^{-1}
        EElement yi = zp_.inv(y);
        Eq1Factors f{
            make_n(zp_.mul(ybi, x), yi),
            make_h(ybi),
            make_nprime(zp_.neg(zp_.mul(ybi, zp_.conj(x))), yi),
        };
        return f;
    }

    // ---- conjugation by alpha ----

    /// alpha^e n alpha^{-e}, computed by matrix conjugation.  Works for both
    /// N and N' inputs; the filtration index shifts by -2e resp. +2e.
    GroupElement conj_by_alpha(const GroupElement& n, int e) const {
        if (!member(n, SubgroupTag::N) && !member(n, SubgroupTag::Nprime))
            throw ConstraintViolation("conj_by_alpha: input not in N or N'");
        GroupElement a = alpha();
        GroupElement ai = inv(a);
        GroupElement r = n;
        for (int i = 0; i < (e > 0 ? e : -e); ++i)
            r = (e > 0) ? mul(mul(a, r), ai) : mul(mul(ai, r), a);
        return r;
    }

    // ---- level constants ----

    struct LevelConstants {
        int32_t n_K;
        int32_t m_K;
    };

    /// Determined by exhaustive membership testing of filtration generators
    /// against the pro-p Iwahori, scanning k in [-3, 4].
    LevelConstants level_constants(CompactLabel K) const {
        auto full_in = [&](bool primed, int32_t k) {
            for (const auto& rep : coset_reps(primed, k, 2))
                if (!member(rep, SubgroupTag::I1K, K)) return false;
            return true;
        };
        std::optional<int32_t> nk, mk;
        for (int32_t k = 4; k >= -3; --k) {
            if (full_in(false, k))
                nk = k;
            else
                break;
        }
        for (int32_t k = 4; k >= -3; --k) {
            if (full_in(true, k))
                mk = k;
            else
                break;
        }
        if (!nk || !mk) throw Error("level constants not found in scan range");
        return {*nk, *mk};
    }

    // ---- random elements ----

    /// Seeded random words in {n, n', h, alpha^{+-1}, beta}.  G is not
    /// compact, so sampling means bounded random words in the generators.
    class Sampler {
      public:
        Sampler(const GroupCtx& G, uint64_t seed, int max_len = 6)
            : G_(G), rng_(seed), max_len_(max_len) {}

        GroupElement element() {
            int len = 1 + int(rng_() % uint64_t(max_len_));
            GroupElement g = G_.identity();
            for (int i = 0; i < len; ++i) g = G_.mul(g, letter());
            return g;
        }

        /// Random element of a compact subgroup via membership filtering of
        /// K-generator words (always terminates: letters keep K stable).
        GroupElement compact_element(CompactLabel K) {
            GroupElement g = G_.identity();
            int len = 1 + int(rng_() % uint64_t(max_len_ + 2));
            for (int i = 0; i < len; ++i) {
                GroupElement cand = G_.mul(g, compact_letter(K));
                g = cand;
            }
            return g;
        }

        /// Random integral pair (x,y) with the hermitian constraint and
        /// val(y) in {vlo..vhi}.
        std::pair<EElement, EElement> n_pair(int32_t vlo = 0, int32_t vhi = 1) {
            const Padic& zp = G_.zp();
            int32_t k = vlo + int32_t(rng_() % uint64_t(vhi - vlo + 1));
            int32_t xlo = (k >= 0) ? (k + 1) / 2 : -((-k) / 2);
            EElement x = zp.shift(
                zp.from_parts(int64_t(rng_() % zp.p_pow(3)), int64_t(rng_() % zp.p_pow(3))), xlo);
            auto sols = zp.hermitian_solutions(x, k, 2);
            EElement y = sols[rng_() % sols.size()];
            return {x, y};
        }

        /// Random nonzero (x,y) with y a unit (val(y) = 0) when wanted.
        std::pair<EElement, EElement> n_pair_unit_y() {
            while (true) {
                auto [x, y] = n_pair(0, 0);
                if (!G_.zp().is_zero(y) && y.val == 0) return {x, y};
            }
        }

        EElement unit() {
            const Padic& zp = G_.zp();
            while (true) {
                EElement u = zp.from_parts(int64_t(rng_() % zp.p_pow(2)),
                                           int64_t(rng_() % zp.p_pow(2)));
                if (!zp.is_zero(u) && u.val == 0) return u;
            }
        }

        uint64_t raw() { return rng_(); }

      private:
        GroupElement letter() {
            switch (rng_() % 6) {
                case 0: {
                    auto [x, y] = n_pair(0, 2);
                    return G_.make_n(x, y);
                }
                case 1: {
                    auto [x, y] = n_pair(0, 2);
                    return G_.make_nprime(x, y);
                }
                case 2:
                    return G_.make_h(unit());
                case 3:
                    return G_.alpha();
                case 4:
                    return G_.inv(G_.alpha());
                default:
                    return G_.beta();
            }
        }

        GroupElement compact_letter(CompactLabel K) {
            if (K == CompactLabel::K0) {
                switch (rng_() % 4) {
                    case 0: {
                        auto [x, y] = n_pair(0, 2);
                        return G_.make_n(x, y);
                    }
                    case 1: {
                        auto [x, y] = n_pair(0, 2);
                        return G_.make_nprime(x, y);
                    }
                    case 2:
                        return G_.make_h(unit());
                    default:
                        return G_.beta();
                }
            }
            switch (rng_() % 4) {
                case 0: {
                    auto [x, y] = n_pair(-1, 1);
                    return G_.make_n(x, y);
                }
                case 1: {
                    auto [x, y] = n_pair(1, 2);
                    return G_.make_nprime(x, y);
                }
                case 2:
                    return G_.make_h(unit());
                default:
                    return G_.beta_prime();
            }
        }

        const GroupCtx& G_;
        std::mt19937_64 rng_;
        int max_len_;
    };

  private:
    Padic zp_;
};

}  // namespace u21
