#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace superdyn {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  SingularRegion,
  GridMismatch,
  HermiticityViolation,
  NonHermitianInput,
  NonHermitianAssembly,
  DimensionTooLarge,
  NonpositiveTime,
  QuadratureNotConverged,
  EnergyDriftExceeded,
  NotConverged,
  NotFactorized,
  TruncationLeak,
  ParseError,
  UnknownKey,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// True for the numerical guards that abort a run (exit code 2 in the CLI).
bool is_numerical_guard(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace superdyn
