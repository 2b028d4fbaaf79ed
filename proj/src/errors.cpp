#include "superdyn/errors.hpp"

namespace superdyn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularRegion: return "SingularRegion";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::HermiticityViolation: return "HermiticityViolation";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::NonHermitianAssembly: return "NonHermitianAssembly";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::NonpositiveTime: return "NonpositiveTime";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::EnergyDriftExceeded: return "EnergyDriftExceeded";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NotFactorized: return "NotFactorized";
    case ErrorKind::TruncationLeak: return "TruncationLeak";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_numerical_guard(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TruncationLeak:
    case ErrorKind::NotConverged:
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::EnergyDriftExceeded:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace superdyn
