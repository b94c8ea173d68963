#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

/// One inter-regeneration block (X_{tau_m+1} - X_{tau_m}, ..., X_{tau_{m+1}} - X_{tau_m}).
struct RegenerationCycle {
  std::int64_t duration = 0;
  std::span<const std::int64_t> displacement;
  std::span<const std::uint8_t> steps;
  /// Always false for harvested cycles; the block before tau_1 is never kept.
  bool is_first = false;
};

/// Cycles grouped into runs; run r holds consecutive cycles of one walk in
/// temporal order. Cycles of different runs are independent.
class CycleEnsemble {
 public:
  struct Run {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
  };

  CycleEnsemble() = default;
  CycleEnsemble(int dimension, std::vector<double> direction);

  int dimension() const { return dimension_; }
  std::span<const double> direction() const { return direction_; }
  std::size_t size() const { return durations_.size(); }
  bool empty() const { return durations_.empty(); }

  std::int64_t duration(std::size_t i) const { return durations_[i]; }
  std::span<const std::int64_t> displacement(std::size_t i) const {
    return {displacements_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  std::span<const std::uint8_t> steps(std::size_t i) const {
    return {steps_.data() + step_offsets_[i], step_offsets_[i + 1] - step_offsets_[i]};
  }
  RegenerationCycle cycle(std::size_t i) const {
    return {durations_[i], displacement(i), steps(i), false};
  }
  const std::vector<Run>& runs() const { return runs_; }

  /// Steps of cycles [begin, end) concatenated.
  std::span<const std::uint8_t> steps(std::size_t begin, std::size_t end) const {
    return {steps_.data() + step_offsets_[begin], step_offsets_[end] - step_offsets_[begin]};
  }

  /// Starts a new run; subsequent add_cycle calls append to it.
  void begin_run();
  /// Appends a cycle to the current run; duration and displacement are
  /// derived from the steps. Throws if the block does not gain level.
  void add_cycle(std::span<const std::uint8_t> steps);
  /// Appends all runs of other (same dimension and direction).
  void append(const CycleEnsemble& other);

  // Provenance and diagnostics.
  bool nestling = false;
  std::string law_fingerprint;
  std::uint64_t seed = 0;
  std::size_t cycle_cap = 0;
  std::size_t starved_walks = 0;
  std::size_t simulated_steps = 0;

 private:
  int dimension_ = 1;
  std::vector<double> direction_;
  std::vector<std::int64_t> durations_;
  std::vector<std::int64_t> displacements_;
  std::vector<std::size_t> step_offsets_{0};
  std::vector<std::uint8_t> steps_;
  std::vector<Run> runs_;
};

struct HarvestOptions {
  std::size_t n_cycles = 100000;
  std::size_t runs = 8;
  std::uint64_t seed = 1;
  /// A walk whose current cycle exceeds this many steps is starved.
  std::size_t cycle_cap = 1000000;
  /// A regeneration candidate is accepted once the walk has climbed this
  /// many levels above it; the chance of a later undershoot decays
  /// exponentially in the margin.
  double confirmation_margin = 200.0;
  /// Starved walks are discarded and replaced; more than this many raises
  /// RegenerationStarvation.
  std::size_t max_starved_walks = 64;
  /// Worker threads (0 = hardware concurrency). Never affects results.
  unsigned workers = 1;
};

/// Harvests inter-regeneration cycles relative to the unit vector direction.
///
/// Each run is an independent annealed walk on a fresh environment. The block
/// before the first regeneration is discarded, then consecutive blocks are
/// collected until the run's quota is met. The output is a deterministic
/// function of (law, direction, options) apart from `workers`.
///
/// Throws DegenerateDrift (from classify_nestling) and RegenerationStarvation.
CycleEnsemble harvest_cycles(const EnvironmentLaw& law, std::span<const double> direction,
                             const HarvestOptions& options);

/// Versioned CSV cycle log: '#' header lines with provenance, then
/// run,duration,disp_0..disp_{d-1},steps.
void write_cycle_log(const CycleEnsemble& ensemble, std::ostream& out);
CycleEnsemble read_cycle_log(std::istream& in);

inline constexpr int kCycleLogVersion = 1;

}  // namespace rwre
