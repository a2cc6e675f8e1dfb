#include "moqc/error.hpp"

namespace moqc {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::MissingConstant: return "MissingConstant";
    case ErrorKind::ConstantRedefinition: return "ConstantRedefinition";
    case ErrorKind::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorKind::DeadlockDetected: return "DeadlockDetected";
    case ErrorKind::VariableRangeViolation: return "VariableRangeViolation";
    case ErrorKind::NonNormalizedDistribution: return "NonNormalizedDistribution";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::RegionEmpty: return "RegionEmpty";
    case ErrorKind::RegionUnbounded: return "RegionUnbounded";
    case ErrorKind::StateNameClash: return "StateNameClash";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::UnsupportedGuardAtom: return "UnsupportedGuardAtom";
    case ErrorKind::UnassignedParameter: return "UnassignedParameter";
    case ErrorKind::EmptyCounts: return "EmptyCounts";
    case ErrorKind::UnknownParameter: return "UnknownParameter";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

} // namespace moqc
