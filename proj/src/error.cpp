#include "semcode/error.hpp"

namespace semcode {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::UnsupportedCase: return "unsupported-case";
    case ErrorKind::DegenerateObjective: return "degenerate-objective";
    case ErrorKind::NoSolution: return "no-solution";
    case ErrorKind::ConstraintViolation: return "constraint-violation";
    case ErrorKind::NumericRange: return "numeric-range";
    case ErrorKind::InvalidLengths: return "invalid-lengths";
    case ErrorKind::InvalidSymbol: return "invalid-symbol";
    case ErrorKind::CorruptStream: return "corrupt-stream";
    case ErrorKind::SweepFailure: return "sweep-failure";
    case ErrorKind::CalibrationFailure: return "calibration-failure";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace semcode
