#include "rwre/error.hpp"

namespace rwre {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotAProbability: return "NotAProbability";
    case ErrorKind::EllipticityViolated: return "EllipticityViolated";
    case ErrorKind::DegenerateDrift: return "DegenerateDrift";
    case ErrorKind::RegenerationStarvation: return "RegenerationStarvation";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::NonFiniteWeight: return "NonFiniteWeight";
    case ErrorKind::LeftRegionC: return "LeftRegionC";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InsufficientRunLength: return "InsufficientRunLength";
    case ErrorKind::PathTooShort: return "PathTooShort";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NotTransientRight: return "NotTransientRight";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int error_exit_code(ErrorKind kind) noexcept {
  return 10 + static_cast<int>(kind);
}

void raise(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(error_kind_name(kind)) + ": " + what);
}

}  // namespace rwre
