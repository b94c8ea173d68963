#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rwre/lattice.hpp"

namespace rwre {

/// One site's jump law over the 2d unit steps, indexed by Step::index().
class TransitionKernel {
 public:
  TransitionKernel() = default;

  /// Builds a kernel from dense probabilities. Validation happens in make_law;
  /// this only checks the length.
  TransitionKernel(int dimension, std::vector<double> probs);

  /// Steps missing from the map get probability zero.
  static TransitionKernel from_map(int dimension, const std::map<Step, double>& probs);

  int dimension() const { return dimension_; }
  double operator[](Step s) const { return probs_[static_cast<std::size_t>(s.index())]; }
  std::span<const double> probs() const { return probs_; }

  /// Smallest entry.
  double min_entry() const;

 private:
  friend class EnvironmentLaw;
  int dimension_ = 0;
  std::vector<double> probs_;
};

/// Sum over steps of p(z) z.
std::vector<double> local_drift(const TransitionKernel& kernel);

/// Finite-support i.i.d. law of site kernels: site kernel = atoms[i] with
/// probability weights[i], independently across sites.
///
/// Immutable after construction. Use make_law to build one.
class EnvironmentLaw {
 public:
  int dimension() const { return dimension_; }
  const std::vector<TransitionKernel>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Uniform ellipticity constant: the smallest kernel entry over all atoms.
  double kappa() const { return kappa_; }

  /// Mean kernel E[pi(0, .)].
  TransitionKernel mean_kernel() const;

  /// 16 hex digits identifying the law (FNV-1a over the normalised values).
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  friend EnvironmentLaw make_law(int, std::vector<TransitionKernel>, std::vector<double>);
  int dimension_ = 0;
  std::vector<TransitionKernel> atoms_;
  std::vector<double> weights_;
  double kappa_ = 0.0;
  std::string fingerprint_;
};

/// Tolerance on probability sums.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Validates and normalises a law.
///
/// Throws Error(EllipticityViolated) if any kernel entry is <= 0 and
/// Error(NotAProbability) if a kernel or the weight vector does not sum to 1
/// within kProbabilityTolerance (or a weight is negative). Kernels and
/// weights are renormalised once after validation.
EnvironmentLaw make_law(int dimension, std::vector<TransitionKernel> atoms,
                        std::vector<double> weights);

/// Nestling / non-nestling classification of a law.
struct NestlingLabel {
  bool nestling = true;
  /// Unit witness direction for non-nestling laws; empty when nestling.
  std::vector<double> direction;
  /// max over unit u of min over atoms of <drift, u> (positive iff non-nestling).
  double margin = 0.0;

  bool is_nestling() const { return nestling; }
};

/// Exact for finite-support laws. For d >= 2 the witness maximises the
/// minimum atom-drift projection over a 1 degree sphere grid, polished by
/// local ascent. Throws Error(DegenerateDrift) if every atom has zero drift.
NestlingLabel classify_nestling(const EnvironmentLaw& law);

/// E[ prod_z pi(0,z)^counts[z] ] = sum_atoms weight * prod_z kernel[z]^counts[z].
/// counts is indexed by Step::index() and has length 2d.
double annealed_site_moment(const EnvironmentLaw& law, std::span<const std::int64_t> counts);

}  // namespace rwre
