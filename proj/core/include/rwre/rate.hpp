#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/lmgf.hpp"

namespace rwre {

/// LLN velocity mean(X_tau) / mean(tau) with delta-method standard errors.
struct VelocityEstimate {
  std::vector<double> velocity;
  std::vector<double> std_error;
};

VelocityEstimate lln_velocity(const CycleEnsemble& ensemble);

struct InvertOptions {
  /// Stop when |grad_lambda(theta) - xi| < tol.
  double tol = 1e-8;
  int max_iter = 60;
  LambdaOptions lambda{};
};

/// Newton iteration theta <- theta + H(theta)^{-1} (xi - grad(theta)) with
/// step halving on Lambda(theta) - <theta, xi>. Starts at 0 for non-nestling
/// ensembles and at 0.1 u for nestling ones.
///
/// Throws LeftRegionC if an iterate cannot be kept in InteriorC and
/// NoConvergence after max_iter iterations.
std::vector<double> invert_velocity(const CycleEnsemble& ensemble, std::span<const double> xi,
                                    const InvertOptions& options = {});

struct RatePoint {
  std::vector<double> xi;
  std::vector<double> theta;
  double rate = 0.0;
  /// Standard error of the rate (that of lambda_hat at theta(xi)).
  double rate_se = 0.0;
  double lambda = 0.0;
  /// Inverse of the lmgf Hessian at theta(xi).
  Eigen::MatrixXd rate_hessian;
  double rate_hessian_min_eigenvalue = 0.0;
  /// max over the diagnostic theta' grid (theta(xi) included) of <theta',xi> - lambda(theta'),
  /// minus rate. Should not exceed a few rate_se.
  double fenchel_gap = 0.0;
  std::size_t fenchel_points = 0;
};

struct RateOptions {
  InvertOptions invert{};
  /// Per-axis offsets around theta(xi) forming the Fenchel diagnostic grid.
  std::vector<double> fenchel_offsets{-0.2, -0.1, -0.05, 0.05, 0.1, 0.2};
};

RatePoint rate_at(const CycleEnsemble& ensemble, std::span<const double> xi,
                  const RateOptions& options = {});

struct RateRow {
  std::vector<double> xi;
  /// "ok" or the error kind name.
  std::string status = "ok";
  std::string message;
  std::optional<RatePoint> point;
};

struct RateCurve {
  std::vector<RateRow> rows;
  VelocityEstimate velocity;
};

/// rate_at over a grid on one shared ensemble; failures become rows with an
/// error status and never abort the sweep.
RateCurve rate_curve(const CycleEnsemble& ensemble, const std::vector<std::vector<double>>& xi_grid,
                     const RateOptions& options = {});
RateCurve rate_curve(const EnvironmentLaw& law, std::span<const double> direction,
                     const std::vector<std::vector<double>>& xi_grid,
                     const HarvestOptions& harvest, const RateOptions& options = {});

struct ProbePoint {
  std::vector<double> theta;
  RegionLabel label;
  /// grad lambda_hat for InteriorC points.
  std::optional<std::vector<double>> grad;
  /// mean(X e^{<theta,X>}) / mean(tau e^{<theta,X>}) for BoundaryCb points.
  std::optional<std::vector<double>> extended_grad;
  std::string status = "ok";
};

struct BoundaryProbe {
  std::vector<ProbePoint> points;
  VelocityEstimate velocity;
  /// <Hbar(0)^{-1} xi_o, xi_o> with Hbar(0) = mean((X - xi_o tau)(X - xi_o tau)^T)/mean(tau);
  /// reported for d >= 2.
  std::optional<double> normal_inner_product;
};

/// Gradient of the zero-lambda extension, mean(X e^{<theta,X>}) / mean(tau e^{<theta,X>}).
std::vector<double> extended_gradient(const CycleEnsemble& ensemble, std::span<const double> theta);

/// <Hbar(0)^{-1} xi_o, xi_o>.
double boundary_normal_inner_product(const CycleEnsemble& ensemble);

BoundaryProbe nestling_boundary_probe(const CycleEnsemble& ensemble,
                                      const std::vector<std::vector<double>>& theta_sequence,
                                      const ClassifyOptions& options = {});
BoundaryProbe nestling_boundary_probe(const EnvironmentLaw& law, std::span<const double> direction,
                                      const std::vector<std::vector<double>>& theta_sequence,
                                      const HarvestOptions& harvest,
                                      const ClassifyOptions& options = {});

}  // namespace rwre
