#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwre {

enum class ErrorKind {
  InvalidArgument,
  NotAProbability,
  EllipticityViolated,
  DegenerateDrift,
  RegenerationStarvation,
  BracketFailure,
  NonFiniteWeight,
  LeftRegionC,
  NoConvergence,
  InsufficientRunLength,
  PathTooShort,
  TooLarge,
  NotTransientRight,
  InvalidConfig,
  IoError,
};

/// Stable name used in error records and CLI exit reports.
std::string_view error_kind_name(ErrorKind kind) noexcept;

/// Process exit code for a given error kind (never 0 or 1).
int error_exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace rwre
