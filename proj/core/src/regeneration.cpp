#include "rwre/regeneration.hpp"

#include <algorithm>
#include <limits>

#include "rwre/error.hpp"

namespace rwre {

RegenerationScan find_regenerations(const Path& path, std::span<const double> direction) {
  if (path.empty()) raise(ErrorKind::InvalidArgument, "path is empty");
  if (static_cast<int>(direction.size()) != path.dimension()) {
    raise(ErrorKind::InvalidArgument, "direction has wrong dimension");
  }
  const auto level = path.levels(direction);
  const std::size_t n = path.size();

  // suffix_min[j] = min_{k > j} level[k]; +inf past the window.
  std::vector<double> suffix_min(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t j = n; j-- > 0;) suffix_min[j] = std::min(suffix_min[j + 1], level[j + 1]);

  std::vector<std::size_t> valid;
  double past_max = level[0];
  for (std::size_t j = 1; j <= n; ++j) {
    if (past_max < level[j] - kLevelTolerance && level[j] <= suffix_min[j] + kLevelTolerance) {
      valid.push_back(j);
    }
    past_max = std::max(past_max, level[j]);
  }

  RegenerationScan scan;
  if (!valid.empty()) {
    scan.provisional = valid.back();
    valid.pop_back();
    scan.confirmed = std::move(valid);
  }
  return scan;
}

}  // namespace rwre
