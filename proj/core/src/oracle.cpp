#include "rwre/oracle.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <algorithm>
#include <limits>
#include <thread>

#include "rwre/error.hpp"
#include "rwre/stats.hpp"

namespace rwre {

namespace {

// Per-site state: product over departures of kernel entries, per atom.
class Enumerator {
 public:
  Enumerator(const EnvironmentLaw& law, std::span<const double> theta, int n)
      : law_(law), theta_(theta.begin(), theta.end()), n_(n), d_(law.dimension()),
        atoms_(law.atoms().size()), side_(2 * n + 1) {
    std::size_t sites = 1;
    for (int i = 0; i < d_; ++i) sites *= static_cast<std::size_t>(side_);
    products_.assign(sites * atoms_, 1.0);
    saved_.resize(static_cast<std::size_t>(n + 1) * atoms_);
  }

  // Sum over paths whose first step is `first`.
  double sum_branch(int first) {
    sum_ = KahanSum{};
    Point origin{};
    step(origin, 1.0, 0, first);
    return sum_.value();
  }

 private:
  std::size_t site_index(const Point& p) const {
    std::size_t idx = 0;
    for (int i = d_ - 1; i >= 0; --i) {
      idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(p[static_cast<std::size_t>(i)] + n_);
    }
    return idx;
  }

  double moment(const double* prod) const {
    double m = 0.0;
    for (std::size_t a = 0; a < atoms_; ++a) m += law_.weights()[a] * prod[a];
    return m;
  }

  void step(const Point& here, double weight, int depth, int s) {
    const std::size_t site = site_index(here) * atoms_;
    double* prod = &products_[site];
    double* save = &saved_[static_cast<std::size_t>(depth) * atoms_];
    const double before = moment(prod);
    for (std::size_t a = 0; a < atoms_; ++a) {
      save[a] = prod[a];
      prod[a] *= law_.atoms()[a].probs()[static_cast<std::size_t>(s)];
    }
    const double w = weight * (moment(prod) / before);
    Point next = here;
    advance(next, Step(s));
    if (depth + 1 == n_) {
      double exponent = 0.0;
      for (int i = 0; i < d_; ++i) exponent += theta_[static_cast<std::size_t>(i)] * next[static_cast<std::size_t>(i)];
      sum_.add(w * std::exp(exponent));
    } else {
      for (int t = 0; t < 2 * d_; ++t) step(next, w, depth + 1, t);
    }
    for (std::size_t a = 0; a < atoms_; ++a) prod[a] = save[a];
  }

  const EnvironmentLaw& law_;
  std::vector<double> theta_;
  int n_;
  int d_;
  std::size_t atoms_;
  int side_;
  std::vector<double> products_;
  std::vector<double> saved_;
  KahanSum sum_;
};

std::uint64_t path_count(int dimension, int n) {
  std::uint64_t count = 1;
  for (int k = 0; k < n; ++k) {
    count *= static_cast<std::uint64_t>(2 * dimension);
    if (count > kMaxEnumeratedPaths) return count;
  }
  return count;
}

}  // namespace

ExactExpectation exact_annealed_expectation(const EnvironmentLaw& law,
                                            std::span<const double> theta, int n,
                                            unsigned workers) {
  const int d = law.dimension();
  if (static_cast<int>(theta.size()) != d) raise(ErrorKind::InvalidArgument, "theta has wrong dimension");
  if (n < 1) raise(ErrorKind::InvalidArgument, "horizon must be >= 1");
  const std::uint64_t paths = path_count(d, n);
  if (paths > kMaxEnumeratedPaths) {
    raise(ErrorKind::TooLarge, "(2d)^n = " + std::to_string(2 * d) + "^" + std::to_string(n) +
                                   " exceeds " + std::to_string(kMaxEnumeratedPaths));
  }
  double side = 1.0;
  for (int i = 0; i < d; ++i) side *= (2.0 * n + 1.0);
  if (side * static_cast<double>(law.atoms().size()) > 5e7) {
    raise(ErrorKind::TooLarge, "site table for this horizon is too large");
  }

  const int branches = 2 * d;
  std::vector<double> partial(static_cast<std::size_t>(branches), 0.0);
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(branches)));
  if (threads == 1) {
    Enumerator e(law, theta, n);
    for (int b = 0; b < branches; ++b) partial[static_cast<std::size_t>(b)] = e.sum_branch(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        Enumerator e(law, theta, n);
        for (int b = static_cast<int>(t); b < branches; b += static_cast<int>(threads)) {
          partial[static_cast<std::size_t>(b)] = e.sum_branch(b);
        }
      });
    }
  }
  KahanSum total;
  for (const double p : partial) total.add(p);

  ExactExpectation out;
  out.n = n;
  out.theta.assign(theta.begin(), theta.end());
  out.value = total.value();
  out.path_count = paths;
  return out;
}

FiniteNFit finite_n_lambda(const EnvironmentLaw& law, std::span<const double> theta,
                           const std::vector<int>& n_list, unsigned workers) {
  if (n_list.size() < 4) raise(ErrorKind::InvalidArgument, "need at least four horizons");
  FiniteNFit fit;
  fit.n_list = n_list;
  for (const int n : n_list) {
    if (path_count(law.dimension(), n) > kMaxEnumeratedPaths) {
      raise(ErrorKind::TooLarge, "horizon " + std::to_string(n) + " exceeds the enumeration cap");
    }
  }
  const bool zero = std::all_of(theta.begin(), theta.end(), [](double t) { return t == 0.0; });
  for (const int n : n_list) {
    // At theta = 0 the expectation is the total mass 1, so Lambda_n = 0.
    const double value = zero ? 1.0 : exact_annealed_expectation(law, theta, n, workers).value;
    fit.lambda_n.push_back(std::log(value) / n);
  }

  // Least squares for Lambda_n = lambda + slope * (1/n).
  const double m = static_cast<double>(n_list.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double x = 1.0 / n_list[i];
    const double y = fit.lambda_n[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) raise(ErrorKind::InvalidArgument, "horizons must be distinct");
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.lambda = (sy - fit.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double r = fit.lambda_n[i] - (fit.lambda + fit.slope / n_list[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

namespace {

struct CramerDerivatives {
  double lambda;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hessian;
};

CramerDerivatives cramer_derivatives(const TransitionKernel& kernel, const Eigen::VectorXd& theta) {
  const int d = kernel.dimension();
  // Log-sum-exp over steps.
  double shift = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2 * d; ++s) {
    const Step z(s);
    shift = std::max(shift, z.sign() * theta(z.axis()));
  }
  double total = 0.0;
  Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(d);  // E[z_i^2] tilted (hessian is diagonal + outer)
  for (int s = 0; s < 2 * d; ++s) {
    const Step z(s);
    const double e = kernel[z] * std::exp(z.sign() * theta(z.axis()) - shift);
    total += e;
    first(z.axis()) += z.sign() * e;
    second(z.axis()) += e;
  }
  CramerDerivatives out;
  out.lambda = shift + std::log(total);
  out.grad = first / total;
  out.hessian = Eigen::MatrixXd((second / total).asDiagonal()) - out.grad * out.grad.transpose();
  return out;
}

}  // namespace

double cramer_rate(const TransitionKernel& kernel, std::span<const double> xi) {
  const int d = kernel.dimension();
  if (static_cast<int>(xi.size()) != d) raise(ErrorKind::InvalidArgument, "xi has wrong dimension");
  if (d == 1) {
    const double x = xi[0];
    const double p = kernel[Step::along(0, 1)];
    const double q = kernel[Step::along(0, -1)];
    if (std::abs(x) > 1.0) return std::numeric_limits<double>::infinity();
    const auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
    return term((1.0 + x) / 2.0, p) + term((1.0 - x) / 2.0, q);
  }

  double l1 = 0.0;
  for (const double x : xi) l1 += std::abs(x);
  if (l1 > 1.0) return std::numeric_limits<double>::infinity();

  const Eigen::Map<const Eigen::VectorXd> target(xi.data(), d);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  auto cur = cramer_derivatives(kernel, theta);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd residual = target - cur.grad;
    if (residual.norm() < 1e-14) break;
    const Eigen::VectorXd step = cur.hessian.ldlt().solve(residual);
    const double f0 = cur.lambda - theta.dot(target);
    double t = 1.0;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = theta + t * step;
      auto next = cramer_derivatives(kernel, trial);
      if (next.lambda - trial.dot(target) <= f0) {
        theta = trial;
        cur = std::move(next);
        break;
      }
    }
  }
  return theta.dot(target) - cur.lambda;
}

CramerClosedForm cramer_closed_form(const TransitionKernel& kernel, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != kernel.dimension()) {
    raise(ErrorKind::InvalidArgument, "theta has wrong dimension");
  }
  const Eigen::Map<const Eigen::VectorXd> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const auto der = cramer_derivatives(kernel, t);
  CramerClosedForm out;
  out.lambda = der.lambda;
  out.grad.assign(der.grad.data(), der.grad.data() + der.grad.size());
  out.hessian = der.hessian;
  out.rate = [kernel](std::span<const double> xi) { return cramer_rate(kernel, xi); };
  return out;
}

double solomon_velocity(const EnvironmentLaw& law) {
  using boost::multiprecision::cpp_rational;
  if (law.dimension() != 1) raise(ErrorKind::InvalidArgument, "Solomon's formula is for d = 1");
  cpp_rational mean_rho = 0;
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    const cpp_rational p(law.atoms()[a][Step::along(0, 1)]);
    const cpp_rational q(law.atoms()[a][Step::along(0, -1)]);
    mean_rho += cpp_rational(law.weights()[a]) * q / p;
  }
  if (mean_rho >= 1) {
    raise(ErrorKind::NotTransientRight,
          "E[rho] = " + std::to_string(static_cast<double>(mean_rho)) + " >= 1");
  }
  const cpp_rational v = (1 - mean_rho) / (1 + mean_rho);
  return static_cast<double>(v);
}

}  // namespace rwre
