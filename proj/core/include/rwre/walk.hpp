#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"

namespace rwre {

/// Finite nearest-neighbour path started at the origin: X_0 = 0,
/// X_k = Z_1 + ... + Z_k.
class Path {
 public:
  Path() = default;
  Path(int dimension, std::vector<std::uint8_t> steps);

  int dimension() const { return dimension_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  std::span<const std::uint8_t> steps() const { return steps_; }
  Step step(std::size_t k) const { return Step(steps_[k]); }

  /// X_0 .. X_n (n+1 points).
  std::vector<Point> positions() const;

  /// <X_k, u> for k = 0 .. n.
  std::vector<double> levels(std::span<const double> u) const;

 private:
  int dimension_ = 1;
  std::vector<std::uint8_t> steps_;
};

/// Optional instrumentation for sample_walk: which atom served each step.
struct WalkTrace {
  std::vector<std::uint32_t> atom_at_step;
  std::size_t sites_drawn = 0;
};

/// Lazily sampled environment plus the walk on it.
///
/// A site's kernel is drawn from the law on the first visit and cached;
/// revisits reuse it. One walker corresponds to one environment, so a fresh
/// walker must be used for every independent walk.
class AnnealedWalker {
 public:
  AnnealedWalker(const EnvironmentLaw& law, StreamRng rng);

  /// Draws the next step and moves.
  Step advance(WalkTrace* trace = nullptr);

  const Point& position() const { return position_; }
  std::size_t sites_drawn() const { return sites_drawn_; }

 private:
  std::uint32_t atom_at(const Point& p);
  std::uint32_t draw_atom();

  const EnvironmentLaw* law_;
  StreamRng rng_;
  int dimension_;
  std::vector<double> atom_cdf_;
  std::vector<std::vector<double>> step_cdf_;
  Point position_{};
  std::size_t sites_drawn_ = 0;

  // d = 1: dense arrays over x >= 0 and x < 0, storing atom + 1 (0 = unseen).
  std::vector<std::uint32_t> line_pos_;
  std::vector<std::uint32_t> line_neg_;

  struct PointHash {
    std::size_t operator()(const Point& p) const noexcept;
  };
  std::unordered_map<Point, std::uint32_t, PointHash> sites_;
};

/// Annealed walk of max_steps steps from the origin. Deterministic in
/// (law, seed, max_steps).
Path sample_walk(const EnvironmentLaw& law, std::uint64_t seed, std::size_t max_steps,
                 WalkTrace* trace = nullptr);

}  // namespace rwre
