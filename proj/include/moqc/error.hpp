#pragma once

#include <stdexcept>
#include <string>

namespace moqc {

enum class ErrorKind {
    SyntaxError,
    UnknownIdentifier,
    TypeMismatch,
    InvalidModel,
    MissingConstant,
    ConstantRedefinition,
    ProbabilityOutOfRange,
    DeadlockDetected,
    VariableRangeViolation,
    NonNormalizedDistribution,
    ShapeMismatch,
    NonConvergence,
    Divergence,
    NumericalFailure,
    RegionEmpty,
    RegionUnbounded,
    StateNameClash,
    AssumptionViolated,
    UnsupportedGuardAtom,
    UnassignedParameter,
    EmptyCounts,
    UnknownParameter,
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. The kind is stable and machine-readable;
/// the message is meant for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace moqc
