#include "rwre/rate.hpp"

#include <cmath>
#include <limits>

#include "rwre/error.hpp"
#include "rwre/stats.hpp"

namespace rwre {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

void check_xi(const CycleEnsemble& ensemble, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != ensemble.dimension()) {
    raise(ErrorKind::InvalidArgument, "velocity has wrong dimension");
  }
}

}  // namespace

VelocityEstimate lln_velocity(const CycleEnsemble& ensemble) {
  if (ensemble.empty()) raise(ErrorKind::InvalidArgument, "ensemble is empty");
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  std::vector<double> tau(ensemble.size());
  for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = static_cast<double>(ensemble.duration(i));
  VelocityEstimate out;
  std::vector<double> x(ensemble.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(ensemble.displacement(i)[k]);
    const auto r = ratio_estimate(x, tau);
    out.velocity.push_back(r.mean);
    out.std_error.push_back(r.std_error);
  }
  return out;
}

std::vector<double> invert_velocity(const CycleEnsemble& ensemble, std::span<const double> xi,
                                    const InvertOptions& options) {
  check_xi(ensemble, xi);
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  std::vector<double> theta(d, 0.0);
  if (ensemble.nestling) {
    for (std::size_t k = 0; k < d; ++k) theta[k] = 0.1 * ensemble.direction()[k];
  }

  const auto objective = [&](const LmgfEstimate& e) { return e.lambda - dot(e.theta, xi); };
  LmgfEstimate current = estimate_lmgf(ensemble, theta, options.lambda);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    Eigen::VectorXd residual(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) residual(static_cast<Eigen::Index>(k)) = xi[k] - current.grad[k];
    if (residual.norm() < options.tol) return current.theta;

    const Eigen::VectorXd step = current.hessian.ldlt().solve(residual);
    const double f0 = objective(current);
    const double slope = -residual.dot(step);  // directional derivative of the objective

    double t = 1.0;
    int region_failures = 0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      std::vector<double> trial(d);
      for (std::size_t k = 0; k < d; ++k) trial[k] = current.theta[k] + t * step(static_cast<Eigen::Index>(k));
      LmgfEstimate next;
      try {
        next = estimate_lmgf(ensemble, trial, options.lambda);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::LeftRegionC && e.kind() != ErrorKind::BracketFailure &&
            e.kind() != ErrorKind::NonFiniteWeight) {
          throw;
        }
        if (++region_failures > 8) {
          raise(ErrorKind::LeftRegionC, "Newton iterate left the region at theta_0 = " +
                                            std::to_string(trial[0]) + ": " + e.what());
        }
        continue;
      }
      const double f1 = objective(next);
      // Near the solution the objective decrease drops below the root-solve
      // noise, so a shrinking gradient residual also accepts the step.
      double next_residual = 0.0;
      for (std::size_t k = 0; k < d; ++k) next_residual += (xi[k] - next.grad[k]) * (xi[k] - next.grad[k]);
      next_residual = std::sqrt(next_residual);
      if (f1 <= f0 + 1e-4 * t * slope + 1e-14 * (1.0 + std::abs(f0)) ||
          next_residual <= (1.0 - 1e-4 * t) * residual.norm()) {
        current = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) raise(ErrorKind::NoConvergence, "line search failed");
  }

  double gap = 0.0;
  for (std::size_t k = 0; k < d; ++k) gap += (xi[k] - current.grad[k]) * (xi[k] - current.grad[k]);
  if (std::sqrt(gap) < options.tol) return current.theta;
  raise(ErrorKind::NoConvergence, "no convergence after " + std::to_string(options.max_iter) +
                                      " iterations; |theta| = " +
                                      std::to_string(std::sqrt(dot(current.theta, current.theta))));
}

RatePoint rate_at(const CycleEnsemble& ensemble, std::span<const double> xi,
                  const RateOptions& options) {
  check_xi(ensemble, xi);
  const auto theta = invert_velocity(ensemble, xi, options.invert);
  const LmgfEstimate est = estimate_lmgf(ensemble, theta, options.invert.lambda);
  const auto g = grad_lambda(ensemble, theta, est.lambda);

  RatePoint p;
  p.xi.assign(xi.begin(), xi.end());
  p.theta = theta;
  p.lambda = est.lambda;
  p.rate = dot(theta, xi) - est.lambda;
  p.rate_se = g.lambda_se;
  p.rate_hessian = est.hessian.inverse();
  p.rate_hessian = 0.5 * (p.rate_hessian + p.rate_hessian.transpose());
  p.rate_hessian_min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.rate_hessian, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();

  // theta(xi) itself belongs to the grid, so the gap is >= 0.
  double best = p.rate;
  p.fenchel_points = 1;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (const double offset : options.fenchel_offsets) {
      auto probe = theta;
      probe[k] += offset;
      try {
        const auto e = lambda_hat(ensemble, probe, options.invert.lambda);
        best = std::max(best, dot(probe, xi) - e.lambda);
        ++p.fenchel_points;
      } catch (const Error&) {
        // Grid points outside the region carry no information.
      }
    }
  }
  p.fenchel_gap = best - p.rate;
  return p;
}

RateCurve rate_curve(const CycleEnsemble& ensemble, const std::vector<std::vector<double>>& xi_grid,
                     const RateOptions& options) {
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    for (std::size_t j = i + 1; j < xi_grid.size(); ++j) {
      if (xi_grid[i] == xi_grid[j]) raise(ErrorKind::InvalidArgument, "duplicate grid point");
    }
  }
  RateCurve curve;
  curve.velocity = lln_velocity(ensemble);
  for (const auto& xi : xi_grid) {
    RateRow row;
    row.xi = xi;
    try {
      row.point = rate_at(ensemble, xi, options);
    } catch (const Error& e) {
      row.status = std::string(e.kind_name());
      row.message = e.what();
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

RateCurve rate_curve(const EnvironmentLaw& law, std::span<const double> direction,
                     const std::vector<std::vector<double>>& xi_grid,
                     const HarvestOptions& harvest, const RateOptions& options) {
  const auto ensemble = harvest_cycles(law, direction, harvest);
  return rate_curve(ensemble, xi_grid, options);
}

std::vector<double> extended_gradient(const CycleEnsemble& ensemble,
                                      std::span<const double> theta) {
  const auto g = grad_lambda(ensemble, theta, 0.0);
  return g.grad;
}

double boundary_normal_inner_product(const CycleEnsemble& ensemble) {
  const auto xi = velocity_point_estimate(ensemble);
  const std::vector<double> zero(xi.size(), 0.0);
  const auto h = hessian_lambda(ensemble, zero, 0.0, xi);
  const Eigen::VectorXd v = to_eigen(xi);
  return v.dot(h.matrix.ldlt().solve(v));
}

BoundaryProbe nestling_boundary_probe(const CycleEnsemble& ensemble,
                                      const std::vector<std::vector<double>>& theta_sequence,
                                      const ClassifyOptions& options) {
  BoundaryProbe probe;
  probe.velocity = lln_velocity(ensemble);
  LambdaOptions lopts;
  lopts.classify = options;
  for (const auto& theta : theta_sequence) {
    ProbePoint pt;
    pt.theta = theta;
    try {
      pt.label = classify_theta(ensemble, theta, ensemble.nestling, options);
      if (pt.label.region == Region::InteriorC) {
        const auto est = lambda_hat(ensemble, theta, lopts);
        pt.grad = grad_lambda(ensemble, theta, est.lambda).grad;
      } else if (pt.label.region == Region::BoundaryCb) {
        pt.extended_grad = extended_gradient(ensemble, theta);
      }
    } catch (const Error& e) {
      pt.status = std::string(e.kind_name());
    }
    probe.points.push_back(std::move(pt));
  }
  if (ensemble.dimension() >= 2) probe.normal_inner_product = boundary_normal_inner_product(ensemble);
  return probe;
}

BoundaryProbe nestling_boundary_probe(const EnvironmentLaw& law, std::span<const double> direction,
                                      const std::vector<std::vector<double>>& theta_sequence,
                                      const HarvestOptions& harvest,
                                      const ClassifyOptions& options) {
  const auto label = classify_nestling(law);
  if (!label.is_nestling()) {
    raise(ErrorKind::InvalidArgument, "boundary probe needs a nestling law");
  }
  const auto ensemble = harvest_cycles(law, direction, harvest);
  return nestling_boundary_probe(ensemble, theta_sequence, options);
}

}  // namespace rwre
