#include "rwre/lmgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/error.hpp"
#include "rwre/stats.hpp"

namespace rwre {

namespace {

// exp() overflows beyond this exponent.
constexpr double kMaxExponent = 700.0;

void check_inputs(const CycleEnsemble& ensemble, std::span<const double> theta) {
  if (ensemble.empty()) raise(ErrorKind::InvalidArgument, "ensemble is empty");
  if (static_cast<int>(theta.size()) != ensemble.dimension()) {
    raise(ErrorKind::InvalidArgument, "theta has wrong dimension");
  }
  for (const double t : theta) {
    if (!std::isfinite(t)) raise(ErrorKind::NonFiniteWeight, "theta is not finite");
  }
}

double dot(std::span<const double> theta, std::span<const std::int64_t> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) s += theta[i] * static_cast<double>(x[i]);
  return s;
}

bool is_zero(std::span<const double> theta) {
  return std::all_of(theta.begin(), theta.end(), [](double t) { return t == 0.0; });
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> exponents(const CycleEnsemble& ensemble, std::span<const double> theta,
                              double r) {
  std::vector<double> a(ensemble.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = dot(theta, ensemble.displacement(i)) - r * static_cast<double>(ensemble.duration(i));
  }
  return a;
}

// exp(a_i), raising NonFiniteWeight when any exponent would overflow.
std::vector<double> weights(const CycleEnsemble& ensemble, std::span<const double> theta,
                            double r) {
  auto a = exponents(ensemble, theta, r);
  for (double& x : a) {
    if (!(x < kMaxExponent)) {
      raise(ErrorKind::NonFiniteWeight,
            "exponent <theta,X> - r tau = " + std::to_string(x) + " overflows");
    }
    x = std::exp(x);
  }
  return a;
}

// log mean exp(a) and d/dr of it, i.e. -mean(tau w)/mean(w).
std::pair<double, double> log_psi_and_slope(const CycleEnsemble& ensemble,
                                            std::span<const double> theta, double r) {
  const auto a = exponents(ensemble, theta, r);
  const double shift = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(shift)) raise(ErrorKind::NonFiniteWeight, "non-finite exponent");
  double sw = 0.0, stw = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = std::exp(a[i] - shift);
    sw += w;
    stw += static_cast<double>(ensemble.duration(i)) * w;
  }
  const double log_psi = shift + std::log(sw / static_cast<double>(a.size()));
  return {log_psi, -stw / sw};
}

}  // namespace

std::string_view region_name(Region r) noexcept {
  switch (r) {
    case Region::InteriorC: return "InteriorC";
    case Region::BoundaryCb: return "BoundaryCb";
    case Region::OutsideC: return "OutsideC";
    case Region::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

PsiEstimate psi_hat(const CycleEnsemble& ensemble, std::span<const double> theta, double r) {
  check_inputs(ensemble, theta);
  PsiEstimate out;
  out.theta.assign(theta.begin(), theta.end());
  out.r = r;
  out.n_cycles = ensemble.size();
  if (is_zero(theta) && r == 0.0) {
    out.value = 1.0;
    out.std_error = 0.0;
    out.ess = static_cast<double>(ensemble.size());
    out.low_ess = out.ess < 100.0;
    return out;
  }
  auto a = exponents(ensemble, theta, r);
  for (double& x : a) x = std::exp(x);
  const auto m = mean_estimate(a);
  out.value = m.mean;
  out.std_error = m.std_error;
  out.ess = effective_sample_size(a);
  out.low_ess = out.ess < 100.0;
  return out;
}

double log_psi_hat(const CycleEnsemble& ensemble, std::span<const double> theta, double r) {
  check_inputs(ensemble, theta);
  return log_psi_and_slope(ensemble, theta, r).first;
}

std::vector<double> velocity_point_estimate(const CycleEnsemble& ensemble) {
  if (ensemble.empty()) raise(ErrorKind::InvalidArgument, "ensemble is empty");
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  std::vector<double> sx(d, 0.0);
  double st = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto x = ensemble.displacement(i);
    for (std::size_t k = 0; k < d; ++k) sx[k] += static_cast<double>(x[k]);
    st += static_cast<double>(ensemble.duration(i));
  }
  for (double& v : sx) v /= st;
  return sx;
}

double solve_renewal_root(const CycleEnsemble& ensemble, std::span<const double> theta,
                          double tol) {
  check_inputs(ensemble, theta);
  if (is_zero(theta)) return 0.0;

  const auto xi = velocity_point_estimate(ensemble);
  double lo = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) lo += theta[i] * xi[i];
  lo -= 0.5;
  double hi = norm(theta) + 0.5;

  const auto g = [&](double r) { return log_psi_and_slope(ensemble, theta, r).first; };
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    raise(ErrorKind::BracketFailure, "psi_hat does not straddle 1 on [" + std::to_string(lo) +
                                         ", " + std::to_string(hi) + "]");
  }

  double r = 0.5 * (lo + hi);
  double g_r = g(r);
  for (int it = 0; it < 200 && std::abs(g_r) >= tol; ++it) {
    if (g_r > 0.0) {
      lo = r;
    } else {
      hi = r;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    r = mid;
    g_r = g(r);
  }

  // Newton polish while it helps; log psi is convex and decreasing in r.
  auto [value, slope] = log_psi_and_slope(ensemble, theta, r);
  for (int it = 0; it < 4 && value != 0.0 && slope < 0.0; ++it) {
    const double candidate = r - value / slope;
    if (!std::isfinite(candidate)) break;
    const auto [v_c, s_c] = log_psi_and_slope(ensemble, theta, candidate);
    if (!(std::abs(v_c) < std::abs(value))) break;
    r = candidate;
    value = v_c;
    slope = s_c;
  }
  return r;
}

RegionLabel classify_theta(const CycleEnsemble& ensemble, std::span<const double> theta,
                           bool nestling, const ClassifyOptions& options) {
  check_inputs(ensemble, theta);
  RegionLabel label;

  if (!nestling) {
    try {
      const double root = solve_renewal_root(ensemble, theta);
      const auto w = weights(ensemble, theta, root);
      label.ess = effective_sample_size(w);
    } catch (const Error& e) {
      label.region = Region::Undetermined;
      label.reason = e.what();
      return label;
    }
    if (label.ess < options.min_ess) {
      label.region = Region::Undetermined;
      label.reason = "effective sample size " + std::to_string(label.ess) + " below " +
                     std::to_string(options.min_ess);
      return label;
    }
    label.region = Region::InteriorC;
    return label;
  }

  if (is_zero(theta)) {
    // psi_hat(0, 0) = 1 exactly.
    label.region = Region::BoundaryCb;
    label.statistic = 0.0;
    label.ess = static_cast<double>(ensemble.size());
    return label;
  }

  std::vector<double> w;
  try {
    w = weights(ensemble, theta, 0.0);
  } catch (const Error& e) {
    label.region = Region::Undetermined;
    label.reason = e.what();
    return label;
  }
  label.ess = effective_sample_size(w);
  if (label.ess < options.min_ess) {
    label.region = Region::Undetermined;
    label.reason = "effective sample size " + std::to_string(label.ess) + " below " +
                   std::to_string(options.min_ess);
    return label;
  }
  const auto m = mean_estimate(w);
  const double diff = m.mean - 1.0;
  if (m.std_error > 0.0) {
    label.statistic = diff / m.std_error;
  } else {
    label.statistic = diff == 0.0 ? 0.0
                                  : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  if (label.statistic > options.z_crit) {
    label.region = Region::InteriorC;
  } else if (label.statistic < -options.z_crit) {
    label.region = Region::OutsideC;
  } else {
    label.region = Region::BoundaryCb;
  }
  return label;
}

RegionLabel classify_theta(const CycleEnsemble& ensemble, std::span<const double> theta,
                           const NestlingLabel& label, const ClassifyOptions& options) {
  return classify_theta(ensemble, theta, label.is_nestling(), options);
}

LmgfEstimate lambda_hat(const CycleEnsemble& ensemble, std::span<const double> theta,
                        const LambdaOptions& options) {
  check_inputs(ensemble, theta);
  LmgfEstimate out;
  out.theta.assign(theta.begin(), theta.end());
  out.n_cycles = ensemble.size();
  out.label = classify_theta(ensemble, theta, ensemble.nestling, options.classify);
  if (out.label.region != Region::InteriorC) {
    raise(ErrorKind::LeftRegionC,
          "theta classified " + std::string(region_name(out.label.region)) +
              (out.label.reason.empty() ? "" : " (" + out.label.reason + ")"));
  }

  out.lambda = solve_renewal_root(ensemble, theta, options.tol);
  const auto w = weights(ensemble, theta, out.lambda);
  out.ess = effective_sample_size(w);
  if (out.ess < options.classify.min_ess) {
    raise(ErrorKind::LeftRegionC, "effective sample size of renewal weights " +
                                      std::to_string(out.ess) + " below " +
                                      std::to_string(options.classify.min_ess));
  }
  double stw = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) stw += static_cast<double>(ensemble.duration(i)) * w[i];
  const double n = static_cast<double>(w.size());
  out.lambda_se = mean_estimate(w).std_error / (stw / n);
  return out;
}

GradientEstimate grad_lambda(const CycleEnsemble& ensemble, std::span<const double> theta,
                             double lambda) {
  check_inputs(ensemble, theta);
  const auto w = weights(ensemble, theta, lambda);
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  const std::size_t n = w.size();
  const double nd = static_cast<double>(n);

  std::vector<double> sxw(d, 0.0);
  double stw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ensemble.displacement(i);
    for (std::size_t k = 0; k < d; ++k) sxw[k] += static_cast<double>(x[k]) * w[i];
    stw += static_cast<double>(ensemble.duration(i)) * w[i];
  }
  GradientEstimate out;
  out.grad.resize(d);
  for (std::size_t k = 0; k < d; ++k) out.grad[k] = sxw[k] / stw;

  // Sandwich covariance of (lambda, grad) from the estimating functions
  // h_0 = w - 1, h_k = (X_k - g_k tau) w.
  const auto p = d + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd h(static_cast<Eigen::Index>(p));
  Eigen::VectorXd h_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  std::vector<Eigen::VectorXd> hs;
  hs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ensemble.displacement(i);
    const double tau = static_cast<double>(ensemble.duration(i));
    h(0) = w[i] - 1.0;
    jac(0, 0) -= tau * w[i];
    for (std::size_t k = 0; k < d; ++k) {
      const double resid = static_cast<double>(x[k]) - out.grad[k] * tau;
      h(static_cast<Eigen::Index>(k + 1)) = resid * w[i];
      jac(static_cast<Eigen::Index>(k + 1), 0) -= tau * resid * w[i];
      jac(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k + 1)) -= tau * w[i];
    }
    h_mean += h;
    hs.push_back(h);
  }
  jac /= nd;
  h_mean /= nd;
  for (const auto& hi : hs) {
    const Eigen::VectorXd c = hi - h_mean;
    meat += c * c.transpose();
  }
  meat /= std::max(1.0, nd - 1.0);
  const Eigen::MatrixXd jinv = jac.inverse();
  const Eigen::MatrixXd cov = jinv * meat * jinv.transpose() / nd;
  out.lambda_se = std::sqrt(std::max(0.0, cov(0, 0)));
  out.std_error.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto kk = static_cast<Eigen::Index>(k + 1);
    out.std_error[k] = std::sqrt(std::max(0.0, cov(kk, kk)));
  }
  return out;
}

HessianEstimate hessian_lambda(const CycleEnsemble& ensemble, std::span<const double> theta,
                               double lambda, std::span<const double> grad) {
  check_inputs(ensemble, theta);
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  if (grad.size() != d) raise(ErrorKind::InvalidArgument, "grad has wrong dimension");
  const auto w = weights(ensemble, theta, lambda);
  const auto di = static_cast<Eigen::Index>(d);

  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(di, di);
  Eigen::VectorXd r(di);
  double stw = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto x = ensemble.displacement(i);
    const double tau = static_cast<double>(ensemble.duration(i));
    for (std::size_t k = 0; k < d; ++k) {
      r(static_cast<Eigen::Index>(k)) = static_cast<double>(x[k]) - grad[k] * tau;
    }
    num.noalias() += w[i] * (r * r.transpose());
    stw += tau * w[i];
  }
  HessianEstimate out;
  out.matrix = num / stw;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  return out;
}

LmgfEstimate estimate_lmgf(const CycleEnsemble& ensemble, std::span<const double> theta,
                           const LambdaOptions& options) {
  LmgfEstimate out = lambda_hat(ensemble, theta, options);
  const auto g = grad_lambda(ensemble, theta, out.lambda);
  out.grad = g.grad;
  out.grad_se = g.std_error;
  const auto h = hessian_lambda(ensemble, theta, out.lambda, out.grad);
  out.hessian = h.matrix;
  out.min_eigenvalue = h.min_eigenvalue;
  return out;
}

}  // namespace rwre
