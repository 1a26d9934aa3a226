#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semcode {

enum class ErrorKind {
  InvalidParameter,
  Domain,
  UnsupportedCase,
  DegenerateObjective,
  NoSolution,
  ConstraintViolation,
  NumericRange,
  InvalidLengths,
  InvalidSymbol,
  CorruptStream,
  SweepFailure,
  CalibrationFailure,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numerical failures (as opposed to bad input) map to exit code 3.
  bool is_numerical() const noexcept {
    switch (kind_) {
      case ErrorKind::UnsupportedCase:
      case ErrorKind::DegenerateObjective:
      case ErrorKind::NoSolution:
      case ErrorKind::ConstraintViolation:
      case ErrorKind::NumericRange:
      case ErrorKind::SweepFailure:
      case ErrorKind::CalibrationFailure:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace semcode
