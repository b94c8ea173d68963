#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rwre {

/// Largest lattice dimension supported by the simulator and the oracles.
inline constexpr int kMaxDimension = 8;

/// A nearest-neighbour unit step +e_axis or -e_axis.
///
/// Steps of a d-dimensional walk are indexed 0 .. 2d-1 as
/// (+e_0, -e_0, +e_1, -e_1, ...). The index is what kernels, visit counts
/// and step strings are keyed on.
class Step {
 public:
  constexpr Step() = default;
  constexpr explicit Step(int index) : index_(index) {}

  static constexpr Step along(int axis, int sign) {
    return Step(2 * axis + (sign > 0 ? 0 : 1));
  }

  constexpr int index() const { return index_; }
  constexpr int axis() const { return index_ / 2; }
  constexpr int sign() const { return (index_ % 2 == 0) ? 1 : -1; }

  /// Integer coordinates in Z^d (exactly one entry is +-1).
  std::vector<int> coordinates(int dimension) const;

  /// Config token such as "+x", "-y" or "+e5" for axes without a letter.
  std::string token() const;

  /// Single character used in step strings: upper case = positive direction.
  char code() const;

  friend constexpr bool operator==(Step, Step) = default;
  friend constexpr auto operator<=>(Step, Step) = default;

 private:
  int index_ = 0;
};

/// Number of unit steps in dimension d.
constexpr int step_count(int dimension) { return 2 * dimension; }

/// Parses "+x", "-y", "+z", "-w" or "+e3"/"-e3" (1-based axis). Throws
/// Error(InvalidConfig) on malformed tokens or axes >= dimension.
Step parse_step_token(std::string_view token, int dimension);

/// Parses a step-string character produced by Step::code.
Step parse_step_code(char c, int dimension);

/// Encodes a step sequence as a compact string ("XXxX" for +,+,-,+ in d=1).
std::string encode_steps(std::span<const std::uint8_t> steps);
std::vector<std::uint8_t> decode_steps(std::string_view text, int dimension);

/// Lattice site. Coordinates beyond the walk's dimension stay zero.
using Point = std::array<std::int32_t, kMaxDimension>;

inline void advance(Point& p, Step s) { p[s.axis()] += s.sign(); }

/// <p, u> over the first u.size() coordinates.
double project(const Point& p, std::span<const double> u);

/// <z, u> for a unit step.
inline double project(Step s, std::span<const double> u) {
  return s.sign() * u[s.axis()];
}

/// Tolerance used when comparing projected levels <x, u>. Levels of lattice
/// points along a fixed direction are exact sums of direction components,
/// so genuine ties agree to rounding error only.
inline constexpr double kLevelTolerance = 1e-9;

}  // namespace rwre
