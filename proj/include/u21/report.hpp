#pragma once

// Run configuration and check reports for the verification CLI.

#include <cstdint>
#include <string>
#include <vector>

#include "u21/errors.hpp"
#include "u21/fq.hpp"

namespace u21 {

struct RunConfig {
    uint64_t p = 3;
    uint32_t precision = 6;   // working precision N
    uint32_t max_level = 4;   // deepest congruence level the run may build
    int32_t window_lo = -1;   // spin window floor (level-1 matched)
    int32_t window_hi = 2;
    // distinguished tame character for the sampled deep checks
    int64_t chi1_pi = 1;      // chi1(p) exponent on the generator
    int64_t chi1_teich = 2;   // Teichmueller exponent
    int64_t chi2 = 1;         // norm-one exponent
    uint64_t seed = 0;
    bool json = false;

    void validate() const {
        if (!is_prime(p) || p == 2) throw ConfigInvalid("p must be an odd prime");
        if (precision < 4) throw ConfigInvalid("precision must be >= 4");
        if (max_level < 2 || max_level > 6) throw ConfigInvalid("max level out of range [2,6]");
        if (window_hi - window_lo < 3) throw ConfigInvalid("spin window too narrow");
    }
};

struct CheckReport {
    std::string id;
    std::string statement;  // the verified identity, in math terms
    std::string params;
    std::string status;     // pass | fail | inconclusive
    std::string witness;    // observed values; reproduction data on failure
    double wall_ms = 0;
};

/// Minimal glob: '*' matches any run, '?' one character.
inline bool glob_match(const std::string& pat, const std::string& s, size_t pi = 0,
                       size_t si = 0) {
    while (pi < pat.size() && si < s.size()) {
        if (pat[pi] == '*') {
            for (size_t k = si; k <= s.size(); ++k)
                if (glob_match(pat, s, pi + 1, k)) return true;
            return false;
        }
        if (pat[pi] != '?' && pat[pi] != s[si]) return false;
        ++pi;
        ++si;
    }
    while (pi < pat.size() && pat[pi] == '*') ++pi;
    return pi == pat.size() && si == s.size();
}

inline std::string fq2_str(const Fq2Field& F, Fq2 x) {
    std::string s = std::to_string(x.a);
    if (x.b) s += "+" + std::to_string(x.b) + "s";
    return s;
}

}  // namespace u21
