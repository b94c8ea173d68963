#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

/// Exact E_o[exp{<theta, X_n>}] under the annealed measure.
struct ExactExpectation {
  int n = 0;
  std::vector<double> theta;
  double value = 0.0;
  std::uint64_t path_count = 0;
};

/// Largest number of enumerated paths (2d)^n accepted by the exact oracles.
inline constexpr std::uint64_t kMaxEnumeratedPaths = 100000000ULL;

/// Enumerates all (2d)^n paths depth-first. A path's annealed weight is the
/// product over visited sites of annealed_site_moment of that site's
/// departure counts; the weight is updated multiplicatively per step and
/// restored on backtrack. Branches on the first step run on up to `workers`
/// threads and are reduced in a fixed order. Throws TooLarge above the cap.
ExactExpectation exact_annealed_expectation(const EnvironmentLaw& law,
                                            std::span<const double> theta, int n,
                                            unsigned workers = 1);

struct FiniteNFit {
  /// Intercept of the least-squares fit Lambda_n ~ lambda + slope / n.
  double lambda = 0.0;
  double slope = 0.0;
  /// Root-mean-square residual of the fit.
  double residual = 0.0;
  std::vector<int> n_list;
  std::vector<double> lambda_n;
};

/// Lambda_n = (1/n) log exact_annealed_expectation, extrapolated in 1/n.
/// Needs at least four horizons.
FiniteNFit finite_n_lambda(const EnvironmentLaw& law, std::span<const double> theta,
                           const std::vector<int>& n_list, unsigned workers = 1);

/// Closed forms for a deterministic environment (classical walk with one kernel).
struct CramerClosedForm {
  double lambda = 0.0;
  std::vector<double> grad;
  Eigen::MatrixXd hessian;
  /// Legendre transform xi -> sup_theta <theta, xi> - lambda(theta).
  std::function<double(std::span<const double>)> rate;
};

CramerClosedForm cramer_closed_form(const TransitionKernel& kernel, std::span<const double> theta);

/// Cramer rate of the classical walk: closed form in d = 1, Newton sup for d >= 2.
double cramer_rate(const TransitionKernel& kernel, std::span<const double> xi);

/// Solomon's d = 1 velocity (1 - E[rho]) / (1 + E[rho]), rho = p(-1)/p(+1),
/// evaluated in exact rational arithmetic. Throws NotTransientRight if E[rho] >= 1.
double solomon_velocity(const EnvironmentLaw& law);

}  // namespace rwre
