#pragma once

#include <stdexcept>
#include <string>

namespace petal {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- jet algebra ---

struct NonzeroConstantTerm : Error {
    NonzeroConstantTerm() : Error("inner series must vanish at 0") {}
};

struct ZeroConstantTerm : Error {
    ZeroConstantTerm() : Error("series must be a unit (nonzero constant term)") {}
};

struct NotInvertible : Error {
    NotInvertible() : Error("jet is not invertible (singular linear part)") {}
};

struct ZeroLeadingCoefficient : Error {
    ZeroLeadingCoefficient() : Error("leading coefficient must be nonzero") {}
};

struct UndefinedForPZero : Error {
    UndefinedForPZero() : Error("meromorphic conjugacy undefined for p = 0") {}
};

struct ZeroParametrization : Error {
    ZeroParametrization() : Error("curve parametrization is identically zero") {}
};

// --- germ / curve solvers ---

struct NotFixedDirection : Error {
    NotFixedDirection() : Error("direction is not fixed by the linear part") {}
};

struct NotInvariant : Error {
    explicit NotInvariant(int order_)
        : Error("curve is not invariant (first failure at order " + std::to_string(order_) + ")"),
          order(order_) {}
    int order;
};

struct Obstructed : Error {
    explicit Obstructed(int order_)
        : Error("invariant-curve equation obstructed at order " + std::to_string(order_)),
          order(order_) {}
    int order;
};

struct OrderExhausted : Error {
    explicit OrderExhausted(int needed_)
        : Error("jet order too small; need input order >= " + std::to_string(needed_)),
          needed(needed_) {}
    int needed;
};

// --- reduction ---

struct NotParabolic : Error {
    NotParabolic() : Error("restriction is not parabolic (inner eigenvalue != 1)") {}
};

struct RestrictionIsIdentity : Error {
    RestrictionIsIdentity() : Error("restriction to the curve is the identity jet") {}
};

// --- stable sets / solvers ---

struct AtOrigin : Error {
    AtOrigin() : Error("weight undefined at the origin") {}
};

struct CannotFit : Error {
    explicit CannotFit(const std::string& predicate)
        : Error("region fit failed: " + predicate), violated(predicate) {}
    std::string violated;
};

struct NotSaddle : Error {
    NotSaddle() : Error("direction is not a saddle direction") {}
};

struct NotNode : Error {
    NotNode() : Error("direction is not a node direction") {}
};

struct NoContraction : Error {
    explicit NoContraction(const std::string& detail)
        : Error("Picard deltas failed to contract: " + detail) {}
};

struct InterpolationBreakdown : Error {
    explicit InterpolationBreakdown(const std::string& detail)
        : Error("orbit left the gridded region: " + detail) {}
};

struct TailTooShort : Error {
    TailTooShort() : Error("orbit tail too short for the requested diagnostic") {}
};

// --- CLI ---

struct ParseError : Error {
    ParseError(int line_, int col_, const std::string& expected_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                ": expected " + expected_),
          line(line_), col(col_), expected(expected_) {}
    int line;
    int col;
    std::string expected;
};

} // namespace petal
