#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/walk.hpp"

namespace rwre {

/// Bounded function of a step sequence that reads only its first `depth` steps.
class CylinderFunction {
 public:
  using Fn = std::function<double(std::span<const std::uint8_t>)>;

  CylinderFunction(std::size_t depth, Fn fn, double bound);

  /// Table keyed by step strings (see encode_steps) of length `depth`;
  /// sequences missing from the table evaluate to 0.
  static CylinderFunction from_table(std::size_t depth, int dimension,
                                     const std::map<std::string, double>& table);
  static CylinderFunction constant(double c);
  /// 1 if the first step equals s.
  static CylinderFunction first_step_is(Step s);
  /// Coordinate `axis` of the first step (+1, -1 or 0).
  static CylinderFunction first_step_coordinate(int axis);
  /// a f + b g, of depth max(f.depth, g.depth).
  static CylinderFunction linear_combination(double a, const CylinderFunction& f, double b,
                                             const CylinderFunction& g);

  std::size_t depth() const { return depth_; }
  double bound() const { return bound_; }

  /// Evaluates on the first depth() entries of steps (which must hold at least that many).
  double operator()(std::span<const std::uint8_t> steps) const { return fn_(steps.first(depth_)); }

 private:
  std::size_t depth_;
  Fn fn_;
  double bound_;
};

/// Reads a cylinder table: lines "steps,value" (blank lines and '#' comments
/// skipped, optional "steps,value" header). All step strings share one length.
CylinderFunction read_cylinder_table(std::istream& in, int dimension);

/// Visit counts n_{o,z} at the current site, indexed by Step::index().
struct VisitCounts {
  std::vector<std::int64_t> counts;
  std::int64_t total() const;
};

/// Departures from the path's final site X_n at earlier visits, by step.
VisitCounts visit_counts_at_endpoint(const Path& past);

/// Annealed next-step law given the past's visit counts at the current site:
/// q(z) = E[pi(0,z) prod pi(0,z')^{n_z'}] / E[prod pi(0,z')^{n_z'}].
std::vector<double> annealed_kernel_q(const EnvironmentLaw& law, const VisitCounts& counts);

struct TiltedEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t K_used = 0;
  std::size_t n_blocks = 0;
};

enum class BlockScheme {
  /// Block m of a run uses cycles mK .. mK+K-1; blocks are independent.
  NonOverlapping,
  /// A block starts at every cycle; standard error by batch means.
  Overlapping,
};

/// Ratio estimate of the integral of f under the tilted cycle measure at
/// (theta, lambda). Each block of K consecutive cycles of one run contributes
///   numerator   sum_{j < tau_1} f(Z_{j+1}, ..., Z_{j+K}) exp{<theta,X_{tau_K}> - lambda tau_K}
///   denominator tau_1 exp{<theta,X_{tau_K}> - lambda tau_K}.
/// K is f.depth() unless `depth` is larger. The denominator uses the same
/// blocks, so f = 1 gives exactly 1.
///
/// Throws InsufficientRunLength when no run has K cycles and NonFiniteWeight
/// when a block weight overflows.
TiltedEstimate tilted_cylinder(const CycleEnsemble& ensemble, std::span<const double> theta,
                               double lambda, const CylinderFunction& f,
                               BlockScheme scheme = BlockScheme::NonOverlapping,
                               std::size_t depth = 0);

/// Coordinatewise tilted mean step (depth-1 coordinate functions).
std::vector<TiltedEstimate> mean_drift_tilted(const CycleEnsemble& ensemble,
                                              std::span<const double> theta, double lambda);

/// tilted_cylinder with f treated as depth K' for K' = f.depth() .. K_max.
std::vector<TiltedEstimate> k_consistency_check(const CycleEnsemble& ensemble,
                                                std::span<const double> theta, double lambda,
                                                const CylinderFunction& f, std::size_t K_max,
                                                BlockScheme scheme = BlockScheme::NonOverlapping);

struct EmpiricalEstimate {
  double value = 0.0;
  /// Batch-means standard error over the window series.
  double std_error = 0.0;
  std::size_t windows = 0;
};

/// (1/(n-K)) sum_{j < n-K} f(Z_{j+1}, ..., Z_{j+K}) along one path. The
/// edge truncation biases by O(K/n). Throws PathTooShort if n <= K.
EmpiricalEstimate empirical_process(const Path& path, const CylinderFunction& f,
                                    std::size_t batches = 100);

}  // namespace rwre
