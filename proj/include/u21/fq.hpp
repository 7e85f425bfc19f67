#pragma once

// The coefficient field F_{q^2} with q = p, realized as F_p[s]/(s^2 - c)
// for a fixed quadratic non-residue c mod p.  It doubles as the residue
// field k_E of the unramified quadratic extension, so tame character
// values and residue computations share one representation.

#include <cstdint>
#include <vector>

#include "u21/errors.hpp"

namespace u21 {

inline bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

/// Smallest positive quadratic non-residue mod an odd prime p.
inline uint64_t smallest_nonresidue(uint64_t p) {
    for (uint64_t c = 2; c < p; ++c) {
        bool square = false;
        for (uint64_t x = 1; x <= p / 2; ++x)
            if ((x * x) % p == c) { square = true; break; }
        if (!square) return c;
    }
    throw ConfigInvalid("no quadratic non-residue found (p must be an odd prime)");
}

/// Element of F_{p^2} = F_p[s]/(s^2-c), stored as a + b s with 0 <= a,b < p.
struct Fq2 {
    uint32_t a = 0;
    uint32_t b = 0;
    friend bool operator==(const Fq2&, const Fq2&) = default;
};

/// Arithmetic context for F_{p^2}.  Cheap to copy; all ops are inline mod-p.
class Fq2Field {
  public:
    Fq2Field() = default;
    Fq2Field(uint64_t p, uint64_t c) : p_(p), c_(c % p) {}

    uint64_t p() const { return p_; }
    uint64_t c() const { return c_; }
    uint64_t order() const { return p_ * p_; }

    Fq2 zero() const { return {0, 0}; }
    Fq2 one() const { return {1, 0}; }
    Fq2 make(uint64_t a, uint64_t b = 0) const {
        return {uint32_t(a % p_), uint32_t(b % p_)};
    }
    bool is_zero(Fq2 x) const { return x.a == 0 && x.b == 0; }

    Fq2 add(Fq2 x, Fq2 y) const { return {uint32_t((x.a + y.a) % p_), uint32_t((x.b + y.b) % p_)}; }
    Fq2 sub(Fq2 x, Fq2 y) const {
        return {uint32_t((x.a + p_ - y.a) % p_), uint32_t((x.b + p_ - y.b) % p_)};
    }
    Fq2 neg(Fq2 x) const { return {uint32_t((p_ - x.a) % p_), uint32_t((p_ - x.b) % p_)}; }
    Fq2 mul(Fq2 x, Fq2 y) const {
        uint64_t a = (uint64_t(x.a) * y.a + c_ % p_ * x.b % p_ * y.b) % p_;
        uint64_t b = (uint64_t(x.a) * y.b + uint64_t(x.b) * y.a) % p_;
        return {uint32_t(a), uint32_t(b)};
    }
    /// Frobenius x -> x^p, i.e. s -> -s.
    Fq2 frob(Fq2 x) const { return {x.a, uint32_t((p_ - x.b) % p_)}; }
    /// Norm to F_p: x * frob(x) = a^2 - c b^2.
    uint64_t norm(Fq2 x) const {
        return (uint64_t(x.a) * x.a % p_ + (p_ - c_ % p_) * x.b % p_ * x.b) % p_;
    }
    Fq2 inv(Fq2 x) const {
        if (is_zero(x)) throw InversionOfZero();
        uint64_t n = norm(x);
        uint64_t ninv = inv_mod_p(n);
        Fq2 xb = frob(x);
        return {uint32_t(uint64_t(xb.a) * ninv % p_), uint32_t(uint64_t(xb.b) * ninv % p_)};
    }
    Fq2 pow(Fq2 x, uint64_t e) const {
        Fq2 r = one();
        while (e) {
            if (e & 1) r = mul(r, x);
            x = mul(x, x);
            e >>= 1;
        }
        return r;
    }
    /// Signed power: exponents live in Z/(q^2-1) for units.
    Fq2 pow_signed(Fq2 x, int64_t e) const {
        uint64_t m = order() - 1;
        int64_t r = e % int64_t(m);
        if (r < 0) r += int64_t(m);
        return pow(x, uint64_t(r));
    }

    /// A fixed generator of the cyclic group F_{q^2}^x, found by search.
    Fq2 generator() const {
        uint64_t m = order() - 1;
        std::vector<uint64_t> primes;
        uint64_t t = m;
        for (uint64_t d = 2; d * d <= t; ++d)
            while (t % d == 0) { primes.push_back(d); while (t % d == 0) t /= d; break; }
        if (t > 1) primes.push_back(t);
        // re-collect distinct prime divisors of m
        primes.clear();
        t = m;
        for (uint64_t d = 2; d * d <= t; ++d) {
            if (t % d == 0) {
                primes.push_back(d);
                while (t % d == 0) t /= d;
            }
        }
        if (t > 1) primes.push_back(t);
        for (uint64_t a = 0; a < p_; ++a) {
            for (uint64_t b = 0; b < p_; ++b) {
                Fq2 g{uint32_t(a), uint32_t(b)};
                if (is_zero(g)) continue;
                bool ok = true;
                for (uint64_t q : primes)
                    if (pow(g, m / q) == one()) { ok = false; break; }
                if (ok) return g;
            }
        }
        throw Error("no generator found");
    }

    /// Encode to a small integer (for hashing / packing).
    uint32_t code(Fq2 x) const { return x.a * uint32_t(p_) + x.b; }

  private:
    uint64_t inv_mod_p(uint64_t n) const {
        // Fermat.
        uint64_t r = 1, x = n % p_, e = p_ - 2;
        while (e) {
            if (e & 1) r = r * x % p_;
            x = x * x % p_;
            e >>= 1;
        }
        return r;
    }

    uint64_t p_ = 3;
    uint64_t c_ = 2;
};

}  // namespace u21
