#pragma once

#include <stdexcept>
#include <string>

namespace u21 {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InversionOfZero : Error {
    InversionOfZero() : Error("inversion of zero") {}
};

/// A result could not be certified exactly modulo p^(val+N).
struct PrecisionUnderflow : Error {
    explicit PrecisionUnderflow(const std::string& ctx)
        : Error("precision underflow: " + ctx) {}
};

struct NoSolution : Error {
    explicit NoSolution(const std::string& ctx) : Error("no solution: " + ctx) {}
};

struct ConstraintViolation : Error {
    explicit ConstraintViolation(const std::string& ctx)
        : Error("hermitian constraint violated: " + ctx) {}
};

struct ZeroY : Error {
    ZeroY() : Error("y = 0 not allowed here") {}
};

struct NotInK : Error {
    explicit NotInK(const std::string& ctx) : Error("element not in K: " + ctx) {}
};

struct NotInProPIwahori : Error {
    NotInProPIwahori() : Error("element not in the pro-p Iwahori") {}
};

struct NotAWeight : Error {
    explicit NotAWeight(const std::string& ctx) : Error("not a weight: " + ctx) {}
};

struct Inconclusive : Error {
    explicit Inconclusive(const std::string& ctx) : Error("inconclusive: " + ctx) {}
};

struct LevelOverflow : Error {
    explicit LevelOverflow(const std::string& ctx) : Error("level overflow: " + ctx) {}
};

struct PreconditionNotFixed : Error {
    explicit PreconditionNotFixed(const std::string& ctx)
        : Error("vector not fixed by required filtration subgroup: " + ctx) {}
};

struct WindowMismatch : Error {
    explicit WindowMismatch(const std::string& ctx) : Error("window mismatch: " + ctx) {}
};

struct HypothesisFailed : Error {
    explicit HypothesisFailed(const std::string& ctx) : Error("hypothesis failed: " + ctx) {}
};

struct UnexpectedDimension : Error {
    explicit UnexpectedDimension(const std::string& ctx)
        : Error("unexpected dimension: " + ctx) {}
};

struct NotProportional : Error {
    explicit NotProportional(const std::string& ctx) : Error("not proportional: " + ctx) {}
};

struct ConfigInvalid : Error {
    explicit ConfigInvalid(const std::string& ctx) : Error("invalid config: " + ctx) {}
};

struct IOError : Error {
    explicit IOError(const std::string& ctx) : Error("i/o error: " + ctx) {}
};

}  // namespace u21
