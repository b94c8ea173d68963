#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"

namespace rwre {

/// Sample mean of exp{<theta, X_tau> - r tau} over the cycles.
struct PsiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_cycles = 0;
  std::vector<double> theta;
  double r = 0.0;
  double ess = 0.0;
  /// Set when ess < 100.
  bool low_ess = false;
};

PsiEstimate psi_hat(const CycleEnsemble& ensemble, std::span<const double> theta, double r);

/// log psi_hat computed with a max shift, safe where psi_hat itself overflows.
double log_psi_hat(const CycleEnsemble& ensemble, std::span<const double> theta, double r);

enum class Region { InteriorC, BoundaryCb, OutsideC, Undetermined };

std::string_view region_name(Region r) noexcept;

struct RegionLabel {
  Region region = Region::Undetermined;
  /// Non-empty for Undetermined.
  std::string reason;
  /// (psi_hat(theta, 0) - 1) / SE for nestling laws; 0 otherwise.
  double statistic = 0.0;
  double ess = 0.0;
};

struct ClassifyOptions {
  double z_crit = 3.0;
  double min_ess = 100.0;
};

/// Region test for theta.
///
/// Non-nestling: InteriorC whenever the renewal root exists with finite
/// weights and ESS >= min_ess. Nestling: the sign of psi_hat(theta, 0) - 1 at
/// z_crit standard errors decides InteriorC / OutsideC, with BoundaryCb in
/// between; Undetermined if the weights e^{<theta,X>} overflow or have
/// ESS < min_ess.
RegionLabel classify_theta(const CycleEnsemble& ensemble, std::span<const double> theta,
                           bool nestling, const ClassifyOptions& options = {});
RegionLabel classify_theta(const CycleEnsemble& ensemble, std::span<const double> theta,
                           const NestlingLabel& label, const ClassifyOptions& options = {});

struct LmgfEstimate {
  std::vector<double> theta;
  double lambda = 0.0;
  double lambda_se = 0.0;
  std::vector<double> grad;
  std::vector<double> grad_se;
  Eigen::MatrixXd hessian;
  double min_eigenvalue = 0.0;
  /// ESS of exp{<theta,X> - lambda tau}.
  double ess = 0.0;
  std::size_t n_cycles = 0;
  RegionLabel label;
};

struct LambdaOptions {
  /// Root tolerance on |log psi_hat - 0| (equivalently |psi_hat - 1|).
  double tol = 1e-12;
  ClassifyOptions classify{};
};

/// Solves psi_hat(theta, r) = 1 for r by bisection on the bracket
/// [<theta, xi_hat> - 0.5, |theta| + 0.5] and one Newton polish.
///
/// Refuses (LeftRegionC) unless classify_theta gives InteriorC, using the
/// ensemble's nestling flag. Throws BracketFailure if psi_hat does not
/// straddle 1 on the bracket and NonFiniteWeight for non-finite exponents.
/// Fills theta, lambda, lambda_se, ess, label.
LmgfEstimate lambda_hat(const CycleEnsemble& ensemble, std::span<const double> theta,
                        const LambdaOptions& options = {});

/// Root of psi_hat(theta, .) = 1 without the region check.
double solve_renewal_root(const CycleEnsemble& ensemble, std::span<const double> theta,
                          double tol = 1e-12);

struct GradientEstimate {
  std::vector<double> grad;
  std::vector<double> std_error;
  /// Standard error of lambda from the same estimating equations.
  double lambda_se = 0.0;
};

/// mean(X w) / mean(tau w) with w = exp{<theta,X> - lambda tau}; standard
/// errors from the joint (lambda, grad) estimating equations.
GradientEstimate grad_lambda(const CycleEnsemble& ensemble, std::span<const double> theta,
                             double lambda);

struct HessianEstimate {
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
};

/// mean((X - g tau)(X - g tau)^T w) / mean(tau w).
HessianEstimate hessian_lambda(const CycleEnsemble& ensemble, std::span<const double> theta,
                               double lambda, std::span<const double> grad);

/// lambda_hat, grad_lambda and hessian_lambda at one theta on one ensemble.
LmgfEstimate estimate_lmgf(const CycleEnsemble& ensemble, std::span<const double> theta,
                           const LambdaOptions& options = {});

/// Mean displacement over mean duration (the ratio behind the LLN velocity).
std::vector<double> velocity_point_estimate(const CycleEnsemble& ensemble);

}  // namespace rwre
