#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rwre/walk.hpp"

namespace rwre {

/// Regeneration times found in a finite observation window.
struct RegenerationScan {
  /// Times j whose defining inequalities hold and are certified by a later
  /// regeneration time in the window.
  std::vector<std::size_t> confirmed;
  /// The last time satisfying the inequalities on the observed window; its
  /// future beyond the window is unobserved (right-censored).
  std::optional<std::size_t> provisional;
};

/// Offline scan for times j >= 1 with <X_i,u> < <X_j,u> for all i < j and
/// <X_j,u> <= <X_k,u> for all observed k > j. O(n).
RegenerationScan find_regenerations(const Path& path, std::span<const double> direction);

}  // namespace rwre
