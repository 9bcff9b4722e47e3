#include "robustdx/error.hpp"

namespace robustdx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::SingularMoment: return "SingularMoment";
    case ErrorCode::SingularCov: return "SingularCov";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InfeasibleN: return "InfeasibleN";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Inconsistent: return "Inconsistent";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace robustdx
