#pragma once

#include <stdexcept>
#include <string>

namespace smd {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad constructor/function arguments (wrong n, nonpositive alpha, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Input outside the mathematical domain of a formula.
struct DomainError : Error {
    using Error::Error;
};

// Query outside the range covered by a computed object (e.g. tau > tau_max).
struct RangeError : Error {
    using Error::Error;
};

// Adaptive integrator could not reach the requested horizon within its budget.
struct HorizonError : Error {
    using Error::Error;
};

// State became non-finite or left the invariant region during integration.
struct InstabilityError : Error {
    using Error::Error;
};

// Quadrature failed to meet its tolerance within the subdivision budget.
struct AccuracyError : Error {
    using Error::Error;
};

// Operation applied to data it is not defined for (e.g. S3 on non-power-law data).
struct ApplicabilityError : Error {
    using Error::Error;
};

} // namespace smd
