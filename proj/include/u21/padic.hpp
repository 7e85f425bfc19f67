#pragma once

// Exact fixed-precision arithmetic in F = Q_p and its unramified quadratic
// extension E = F(sqrt(c)), c a unit non-residue.  An element is stored as
// p^val * unit with the unit held modulo p^P for an internal precision
// P >= N + guard digits.  Each element carries the number of digits of its
// unit that are certified; public results must certify at least N digits or
// the operation raises PrecisionUnderflow.  Equality always compares the
// certified window mod p^N, so values computed along different routes agree
// iff they agree as elements of E at working precision.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "u21/errors.hpp"
#include "u21/fq.hpp"

namespace u21 {

using u128 = unsigned __int128;

/// One coefficient pair a + b*sqrt(c) of o_E, coefficients mod p^P.
struct OE {
    uint64_t a = 0;
    uint64_t b = 0;
    friend bool operator==(const OE&, const OE&) = default;
};

struct EElement {
    bool zero = true;
    int32_t val = 0;   // power of the uniformizer p
    OE u;              // unit part, residue nonzero mod p when !zero
    uint8_t cert = 0;  // certified unit digits
};

/// Global arithmetic parameters: the prime, working precision N, the
/// non-residue c, and the internal precision P = N + guard.
class Padic {
  public:
    Padic() = default;

    Padic(uint64_t p, uint32_t N, int guard = 24) : p_(p), N_(N) {
        if (!is_prime(p) || p == 2) throw ConfigInvalid("p must be an odd prime");
        if (N < 4) throw ConfigInvalid("precision N must be >= 4");
        c_ = smallest_nonresidue(p);
        // Cap P so p^P fits comfortably in uint64 (below 2^62).
        uint32_t cap = 0;
        u128 m = 1;
        while (m * p < (u128(1) << 62)) { m *= p; ++cap; }
        P_ = std::min<uint32_t>(N + uint32_t(guard), cap);
        if (P_ < N + 4) throw ConfigInvalid("precision N too large for 64-bit backing");
        pow_.resize(P_ + 1);
        pow_[0] = 1;
        for (uint32_t i = 1; i <= P_; ++i) pow_[i] = pow_[i - 1] * p;
        mod_ = pow_[P_];
        res_ = Fq2Field(p, c_);
        half_ = inv_mod(2);
    }

    uint64_t p() const { return p_; }
    uint32_t N() const { return N_; }
    uint32_t P() const { return P_; }
    uint64_t c() const { return c_; }
    uint64_t modulus() const { return mod_; }
    uint64_t p_pow(uint32_t k) const { return pow_.at(k); }
    const Fq2Field& residue_field() const { return res_; }
    uint64_t q() const { return p_; }

    // ---- constructors ----

    EElement zero() const { return EElement{}; }

    EElement from_parts(int64_t a, int64_t b, int32_t val = 0) const {
        OE u{smod(a), smod(b)};
        return canonize(val, u, uint8_t(P_), "from_parts");
    }

    EElement one() const { return from_parts(1, 0); }
    EElement sqrt_c() const { return from_parts(0, 1); }
    EElement from_int(int64_t n) const { return from_parts(n, 0); }
    /// p^k as an element.
    EElement uniformizer_pow(int32_t k) const {
        EElement e = one();
        e.val = k;
        return e;
    }

    /// Exact element from unit coefficients mod p^P at a given valuation.
    EElement from_unit(int32_t val, OE u, uint8_t cert) const {
        return canonize(val, u, cert, "from_unit");
    }

    // ---- basic predicates ----

    bool is_zero(const EElement& x) const { return x.zero; }

    int32_t valuation(const EElement& x) const {
        if (x.zero) throw Error("valuation of zero");
        return x.val;
    }

    bool is_integral(const EElement& x) const { return x.zero || x.val >= 0; }

    /// Equality at working precision: identical (val, unit mod p^N).
    bool eq(const EElement& x, const EElement& y) const {
        if (x.zero || y.zero) return x.zero == y.zero;
        if (x.val != y.val) return false;
        uint64_t m = pow_[N_];
        return x.u.a % m == y.u.a % m && x.u.b % m == y.u.b % m;
    }

    // ---- ring operations ----

    EElement add(const EElement& x, const EElement& y) const {
        if (x.zero) return y;
        if (y.zero) return x;
        int32_t v = std::min(x.val, y.val);
        uint32_t sx = uint32_t(x.val - v), sy = uint32_t(y.val - v);
        // certified digits of the sum at valuation v
        uint32_t cx = std::min<uint32_t>(P_, x.cert + sx);
        uint32_t cy = std::min<uint32_t>(P_, y.cert + sy);
        uint32_t cs = std::min(cx, cy);
        OE s{addm(shiftm(x.u.a, sx), shiftm(y.u.a, sy)),
             addm(shiftm(x.u.b, sx), shiftm(y.u.b, sy))};
        return canonize_sum(v, s, cs);
    }

    EElement neg(const EElement& x) const {
        if (x.zero) return x;
        EElement r = x;
        r.u.a = (mod_ - x.u.a) % mod_;
        r.u.b = (mod_ - x.u.b) % mod_;
        return r;
    }

    EElement sub(const EElement& x, const EElement& y) const { return add(x, neg(y)); }

    EElement mul(const EElement& x, const EElement& y) const {
        if (x.zero || y.zero) return zero();
        EElement r;
        r.zero = false;
        r.val = x.val + y.val;
        check_val(r.val);
        // (a + b s)(a' + b' s) = (aa' + c bb') + (ab' + a'b) s
        r.u.a = addm(mulm(x.u.a, y.u.a), mulm(c_ % mod_, mulm(x.u.b, y.u.b)));
        r.u.b = addm(mulm(x.u.a, y.u.b), mulm(x.u.b, y.u.a));
        r.cert = std::min(x.cert, y.cert);
        if (r.cert < N_) throw PrecisionUnderflow("mul");
        return r;
    }

    EElement inv(const EElement& x) const {
        if (x.zero) throw InversionOfZero();
        EElement r;
        r.zero = false;
        r.val = -x.val;
        check_val(r.val);
        // 1/(a+bs) = (a-bs)/(a^2 - c b^2); the norm is a unit.
        uint64_t n = subm(mulm(x.u.a, x.u.a), mulm(c_ % mod_, mulm(x.u.b, x.u.b)));
        uint64_t ninv = inv_mod(n);
        r.u.a = mulm(x.u.a, ninv);
        r.u.b = mulm((mod_ - x.u.b) % mod_, ninv);
        r.cert = x.cert;
        if (r.cert < N_) throw PrecisionUnderflow("inv");
        return r;
    }

    EElement conj(const EElement& x) const {
        if (x.zero) return x;
        EElement r = x;
        r.u.b = (mod_ - x.u.b) % mod_;
        return r;
    }

    EElement trace(const EElement& x) const { return add(x, conj(x)); }
    EElement norm(const EElement& x) const { return x.zero ? zero() : mul(x, conj(x)); }

    /// Multiply by p^k.
    EElement shift(const EElement& x, int32_t k) const {
        if (x.zero) return x;
        EElement r = x;
        r.val += k;
        check_val(r.val);
        return r;
    }

    EElement div(const EElement& x, const EElement& y) const { return mul(x, inv(y)); }

    /// x / 2, exact (p odd).
    EElement halve(const EElement& x) const {
        if (x.zero) return x;
        EElement r = x;
        r.u.a = mulm(x.u.a, half_);
        r.u.b = mulm(x.u.b, half_);
        return canonize(r.val, r.u, r.cert, "halve");
    }

    // ---- residue field ----

    /// Reduction o_E -> k_E = F_{q^2} of an integral element.
    Fq2 residue(const EElement& x) const {
        if (x.zero) return res_.zero();
        if (x.val < 0) throw Error("residue of non-integral element");
        if (x.val > 0) return res_.zero();
        return Fq2{uint32_t(x.u.a % p_), uint32_t(x.u.b % p_)};
    }

    /// Residue of the unit part of a nonzero element (drops p^val).
    Fq2 unit_residue(const EElement& x) const {
        if (x.zero) throw Error("unit residue of zero");
        return Fq2{uint32_t(x.u.a % p_), uint32_t(x.u.b % p_)};
    }

    /// Teichmueller lift: the unique (q^2-1)-th root of unity with the given
    /// nonzero residue.  Iterating x -> x^{q^2} gains a digit per step.
    EElement teichmuller(Fq2 r) const {
        if (res_.is_zero(r)) return zero();
        EElement x = from_parts(int64_t(r.a), int64_t(r.b));
        for (uint32_t i = 0; i < P_; ++i) {
            EElement y = x;
            // x^{p^2}
            for (int s = 0; s < 2; ++s) {
                EElement acc = one();
                uint64_t e = p_;
                EElement base = y;
                while (e) {
                    if (e & 1) acc = mul(acc, base);
                    base = mul(base, base);
                    e >>= 1;
                }
                y = acc;
            }
            if (eq_full(x, y)) break;
            x = y;
        }
        return x;
    }

    /// Solve t * conj(t) = nu for a unit nu of o_F (given as an element with
    /// b-part 0).  Unramified norm is surjective on units; the solution is
    /// produced deterministically by residue search plus digit lifting.
    EElement solve_norm(const EElement& nu) const {
        if (nu.zero || nu.val != 0 || nu.u.b % p_ != 0)
            throw NoSolution("solve_norm needs a unit of o_F");
        // residue solution
        Fq2 target{uint32_t(nu.u.a % p_), 0};
        EElement t = zero();
        bool found = false;
        for (uint32_t a = 0; a < p_ && !found; ++a)
            for (uint32_t b = 0; b < p_ && !found; ++b) {
                Fq2 cand{a, b};
                if (res_.is_zero(cand)) continue;
                if (res_.norm(cand) == target.a) {
                    t = teichmuller(cand);
                    found = true;
                }
            }
        if (!found) throw NoSolution("norm residue equation unsolvable");
        // Hensel: multiply by 1 + p^k w, w in o_F, to fix one digit per step.
        for (uint32_t k = 1; k < P_; ++k) {
            EElement err = sub(nu, norm(t));  // divisible by p^k
            if (err.zero || err.val >= int32_t(P_)) break;
            if (err.val < int32_t(k)) throw NoSolution("norm lifting stalled");
            // N(t(1+p^k w)) = N(t)(1 + p^k 2w + ...), need 2w = err/(p^k N(t))
            EElement delta = div(err, norm(t));
            EElement w = halve(delta);               // w = delta/2 at valuation >= k
            t = mul(t, add(one(), w));
        }
        if (!eq(norm(t), nu)) throw NoSolution("norm lifting failed");
        return t;
    }

    // ---- hermitian solutions ----

    /// All classes y mod p^(k+j) with y + conj(y) + x*conj(x) = 0 and
    /// val(y) >= k, ordered by ascending sqrt(c)-coefficient lift.
    /// Every solution is y0 + t*sqrt(c) with y0 = -norm(x)/2 and t in p^k o_F.
    std::vector<EElement> hermitian_solutions(const EElement& x, int32_t k, uint32_t j) const {
        EElement nx = norm(x);
        if (!nx.zero && nx.val < k)
            throw NoSolution("val(x conj(x)) < k");
        EElement y0 = neg(halve(nx));
        std::vector<EElement> out;
        uint64_t count = 1;
        for (uint32_t i = 0; i < j; ++i) count *= p_;
        out.reserve(count);
        for (uint64_t m = 0; m < count; ++m) {
            EElement t = shift(from_int(int64_t(m)), k);  // p^k * m
            EElement y = add(y0, mul(t, sqrt_c()));
            out.push_back(y);
        }
        return out;
    }

    /// Hermitian constraint test at working precision.
    bool satisfies_constraint(const EElement& x, const EElement& y) const {
        EElement lhs = add(norm(x), trace(y));
        return lhs.zero;
    }

    /// Canonical digits mod p^n of an integral element (for coset keys).
    std::pair<uint64_t, uint64_t> digits(const EElement& x, uint32_t n) const {
        if (x.zero) return {0, 0};
        if (x.val < 0) throw Error("digits of non-integral element");
        uint64_t m = pow_.at(n);
        uint32_t s = uint32_t(std::min<int32_t>(x.val, int32_t(n)));
        uint64_t sa = x.u.a % pow_.at(n >= s ? n - s : 0), sb = x.u.b % pow_.at(n >= s ? n - s : 0);
        return {sa * pow_.at(s) % m, sb * pow_.at(s) % m};
    }

    /// Full-precision equality of representations (internal use).
    bool eq_full(const EElement& x, const EElement& y) const {
        if (x.zero || y.zero) return x.zero == y.zero;
        return x.val == y.val && x.u == y.u;
    }

    std::string to_string(const EElement& x) const {
        if (x.zero) return "0";
        std::string s = "p^" + std::to_string(x.val) + "*(" + std::to_string(x.u.a % pow_[N_]);
        s += " + " + std::to_string(x.u.b % pow_[N_]) + "*s)";
        return s;
    }

  private:
    uint64_t addm(uint64_t x, uint64_t y) const { return (x + y) % mod_; }
    uint64_t subm(uint64_t x, uint64_t y) const { return (x + mod_ - y) % mod_; }
    uint64_t mulm(uint64_t x, uint64_t y) const { return uint64_t(u128(x) * y % mod_); }
    uint64_t shiftm(uint64_t x, uint32_t k) const { return mulm(x, pow_.at(k)); }

    uint64_t smod(int64_t v) const {
        int64_t m = int64_t(mod_);
        int64_t r = v % m;
        if (r < 0) r += m;
        return uint64_t(r);
    }

    /// Inverse of a unit of Z/p^P: Fermat mod p then Newton lifting.
    uint64_t inv_mod(uint64_t n) const {
        uint64_t n0 = n % p_;
        if (n0 == 0) throw InversionOfZero();
        uint64_t x = 1, b = n0, e = p_ - 2;
        while (e) {
            if (e & 1) x = x * b % p_;
            b = b * b % p_;
            e >>= 1;
        }
        // Newton: x <- x(2 - n x), doubles correct digits each round.
        for (int i = 0; i < 7; ++i) x = mulm(x, subm(2 % mod_, mulm(n, x)));
        return x;
    }

    uint32_t coeff_val(uint64_t v, uint32_t cap) const {
        uint32_t k = 0;
        while (k < cap && v % p_ == 0) { v /= p_; ++k; }
        if (v == 0) return cap;
        return k;
    }

    void check_val(int64_t v) const {
        if (v > (1 << 20) || v < -(1 << 20)) throw PrecisionUnderflow("valuation overflow");
    }

    EElement canonize(int32_t val, OE u, uint8_t cert, const char* ctx) const {
        uint64_t a = u.a % mod_, b = u.b % mod_;
        uint32_t c = std::min<uint32_t>(cert, P_);
        if (c < N_) throw PrecisionUnderflow(ctx);
        uint32_t ka = coeff_val(a, c), kb = coeff_val(b, c);
        uint32_t k = std::min(ka, kb);
        if (k >= c) return EElement{};  // zero at working precision
        if (c - k < N_) throw PrecisionUnderflow(ctx);
        EElement r;
        r.zero = false;
        r.val = val + int32_t(k);
        check_val(r.val);
        r.u.a = a / pow_[k];
        r.u.b = b / pow_[k];
        r.cert = uint8_t(c - k);
        return r;
    }

    EElement canonize_sum(int32_t val, OE s, uint32_t cs) const {
        return canonize(val, s, uint8_t(std::min<uint32_t>(cs, 255)), "add");
    }

    uint64_t p_ = 3;
    uint32_t N_ = 6;
    uint32_t P_ = 30;
    uint64_t c_ = 2;
    uint64_t mod_ = 0;
    uint64_t half_ = 0;
    std::vector<uint64_t> pow_;
    Fq2Field res_;
};

}  // namespace u21
