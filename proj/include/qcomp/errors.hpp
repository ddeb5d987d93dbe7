#pragma once

#include <stdexcept>
#include <string>

namespace qcomp {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the mathematical domain of an operation
/// (e.g. evaluating T_{kappa,Lambda} past the first zero of C).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operator name not present in the catalog.
class UnknownOperator : public Error {
public:
    using Error::Error;
};

/// Structurally invalid parameter (p <= 1, N < n, m < 16, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Time step too large for the explicit scheme at the realized coefficients.
class CFLViolation : public Error {
public:
    using Error::Error;
};

/// A profile required to stay nondecreasing in s developed negative slope.
class MonotonicityLost : public Error {
public:
    using Error::Error;
};

/// Profile slice is not strictly increasing, so no inverse exists.
class NotInvertible : public Error {
public:
    using Error::Error;
};

/// Barrier ODE slope hit zero before the profile covered the solution range.
class SlopeCollapse : public Error {
public:
    using Error::Error;
};

/// Barrier ODE ran past the allowed domain without covering the range.
class DomainExhausted : public Error {
public:
    using Error::Error;
};

/// Eigenvalue bracket expansion failed to straddle a sign change.
class BracketingFailure : public Error {
public:
    using Error::Error;
};

/// Operator unusable for the requested solve (e.g. alpha == 0 in a shoot).
class DegenerateOperator : public Error {
public:
    using Error::Error;
};

/// Two-sided shooting branches could not be matched.
class MatchingFailure : public Error {
public:
    using Error::Error;
};

/// Iteration budget exhausted before reaching the requested tolerance.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// Field norm exceeded the overflow guard during time stepping.
class Overflow : public Error {
public:
    using Error::Error;
};

/// A check's hypothesis failed on the supplied data.
class PreconditionFailed : public Error {
public:
    using Error::Error;
};

/// Trajectory and profile time grids cannot be aligned.
class TimeMismatch : public Error {
public:
    using Error::Error;
};

/// Value left the invertible range of a profile.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Least-squares fit attempted on degenerate data (zeros or wrong sign).
class DegenerateFit : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-schema configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure while reading or writing artifacts.
class IOError : public Error {
public:
    using Error::Error;
};

} // namespace qcomp
