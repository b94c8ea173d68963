#include "rwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "rwre/error.hpp"

namespace rwre {

TransitionKernel::TransitionKernel(int dimension, std::vector<double> probs)
    : dimension_(dimension), probs_(std::move(probs)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    raise(ErrorKind::InvalidArgument,
          "dimension must be in [1, " + std::to_string(kMaxDimension) + "]");
  }
  if (probs_.size() != static_cast<std::size_t>(step_count(dimension))) {
    raise(ErrorKind::InvalidArgument, "kernel needs exactly 2d entries");
  }
}

TransitionKernel TransitionKernel::from_map(int dimension,
                                            const std::map<Step, double>& probs) {
  std::vector<double> dense(static_cast<std::size_t>(step_count(dimension)), 0.0);
  for (const auto& [step, p] : probs) {
    if (step.index() < 0 || step.index() >= step_count(dimension)) {
      raise(ErrorKind::InvalidArgument, "step outside dimension");
    }
    dense[static_cast<std::size_t>(step.index())] = p;
  }
  return TransitionKernel(dimension, std::move(dense));
}

double TransitionKernel::min_entry() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

std::vector<double> local_drift(const TransitionKernel& kernel) {
  std::vector<double> drift(static_cast<std::size_t>(kernel.dimension()), 0.0);
  for (int s = 0; s < step_count(kernel.dimension()); ++s) {
    const Step step(s);
    drift[static_cast<std::size_t>(step.axis())] += step.sign() * kernel[step];
  }
  return drift;
}

TransitionKernel EnvironmentLaw::mean_kernel() const {
  std::vector<double> mean(static_cast<std::size_t>(step_count(dimension_)), 0.0);
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    for (std::size_t s = 0; s < mean.size(); ++s) {
      mean[s] += weights_[a] * atoms_[a].probs_[s];
    }
  }
  return TransitionKernel(dimension_, std::move(mean));
}

namespace {

void check_distribution(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (const double x : p) {
    if (!std::isfinite(x)) {
      raise(ErrorKind::NotAProbability, std::string(what) + " has a non-finite entry");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " sums to %.17g", total);
    raise(ErrorKind::NotAProbability, std::string(what) + buf);
  }
}

void normalise(std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
}

std::string fingerprint_of(int dimension, const std::vector<TransitionKernel>& atoms,
                           const std::vector<double>& weights) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  // Rounded so that 1 - 0.85 and 0.15 hash alike.
  const auto quantise = [](double p) { return static_cast<std::uint64_t>(std::llround(p * 1e12)); };
  mix(static_cast<std::uint64_t>(dimension));
  mix(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    mix(quantise(weights[a]));
    for (const double p : atoms[a].probs()) mix(quantise(p));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

EnvironmentLaw make_law(int dimension, std::vector<TransitionKernel> atoms,
                        std::vector<double> weights) {
  if (dimension < 1 || dimension > kMaxDimension) {
    raise(ErrorKind::InvalidArgument,
          "dimension must be in [1, " + std::to_string(kMaxDimension) + "]");
  }
  if (atoms.empty()) raise(ErrorKind::InvalidArgument, "law needs at least one atom");
  if (weights.size() != atoms.size()) {
    raise(ErrorKind::InvalidArgument, "weights and atoms differ in length");
  }

  for (std::size_t a = 0; a < atoms.size(); ++a) {
    auto& kernel = atoms[a];
    if (kernel.dimension() != dimension) {
      raise(ErrorKind::InvalidArgument, "atom dimension does not match law dimension");
    }
    for (int s = 0; s < step_count(dimension); ++s) {
      if (!(kernel[Step(s)] > 0.0)) {
        raise(ErrorKind::EllipticityViolated,
              "atom " + std::to_string(a) + " gives step " + Step(s).token() +
                  " probability <= 0");
      }
    }
    check_distribution(kernel.probs(), ("atom " + std::to_string(a)).c_str());
    std::vector<double> probs(kernel.probs().begin(), kernel.probs().end());
    normalise(probs);
    kernel = TransitionKernel(dimension, std::move(probs));
  }
  for (const double w : weights) {
    if (w < 0.0) raise(ErrorKind::NotAProbability, "negative atom weight");
  }
  check_distribution(weights, "weights");
  normalise(weights);

  EnvironmentLaw law;
  law.dimension_ = dimension;
  law.kappa_ = 1.0;
  for (const auto& kernel : atoms) law.kappa_ = std::min(law.kappa_, kernel.min_entry());
  law.fingerprint_ = fingerprint_of(dimension, atoms, weights);
  law.atoms_ = std::move(atoms);
  law.weights_ = std::move(weights);
  return law;
}

namespace {

double min_projection(const std::vector<std::vector<double>>& drifts,
                      const std::vector<double>& u) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& v : drifts) {
    double p = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) p += v[i] * u[i];
    worst = std::min(worst, p);
  }
  return worst;
}

// Hyperspherical coordinates: angles[0..d-3] in [0, pi], angles[d-2] in [0, 2pi).
std::vector<double> unit_from_angles(const std::vector<double>& angles) {
  const std::size_t d = angles.size() + 1;
  std::vector<double> u(d);
  double sin_prod = 1.0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    u[i] = sin_prod * std::cos(angles[i]);
    sin_prod *= std::sin(angles[i]);
  }
  u[d - 1] = sin_prod;
  return u;
}

void normalise_vector(std::vector<double>& u) {
  double n = 0.0;
  for (const double x : u) n += x * x;
  n = std::sqrt(n);
  for (double& x : u) x /= n;
}

// Local pattern search on the sphere; moves along coordinate axes and
// coordinate-pair diagonals, halving the step on failure.
void polish(const std::vector<std::vector<double>>& drifts, std::vector<double>& u,
            double step) {
  const std::size_t d = u.size();
  double best = min_projection(drifts, u);
  std::vector<std::vector<double>> moves;
  for (std::size_t i = 0; i < d; ++i) {
    for (const double s : {1.0, -1.0}) {
      std::vector<double> m(d, 0.0);
      m[i] = s;
      moves.push_back(m);
    }
    for (std::size_t j = i + 1; j < d; ++j) {
      for (const double si : {1.0, -1.0}) {
        for (const double sj : {1.0, -1.0}) {
          std::vector<double> m(d, 0.0);
          m[i] = si;
          m[j] = sj;
          moves.push_back(m);
        }
      }
    }
  }
  while (step > 1e-12) {
    bool improved = false;
    for (const auto& m : moves) {
      std::vector<double> trial = u;
      for (std::size_t i = 0; i < d; ++i) trial[i] += step * m[i];
      normalise_vector(trial);
      const double value = min_projection(drifts, trial);
      if (value > best + 1e-15) {
        best = value;
        u = std::move(trial);
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

NestlingLabel classify_nestling(const EnvironmentLaw& law) {
  const int d = law.dimension();
  std::vector<std::vector<double>> drifts;
  bool all_zero = true;
  for (const auto& atom : law.atoms()) {
    drifts.push_back(local_drift(atom));
    for (const double x : drifts.back()) {
      if (std::abs(x) > kProbabilityTolerance) all_zero = false;
    }
  }
  if (all_zero) {
    raise(ErrorKind::DegenerateDrift, "every atom has zero local drift");
  }

  NestlingLabel label;
  if (d == 1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : drifts) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    if (lo > 0.0) {
      label = {false, {1.0}, lo};
    } else if (hi < 0.0) {
      label = {false, {-1.0}, -hi};
    } else {
      label = {true, {}, std::max(lo, -hi)};
    }
    return label;
  }

  // Grid resolution: 1 degree unless the grid would exceed ~4e5 points.
  int resolution = 1;
  const auto grid_size = [d](int res) {
    double n = 360.0 / res;
    for (int i = 0; i < d - 2; ++i) n *= (180.0 / res + 1.0);
    return n;
  };
  while (grid_size(resolution) > 4e5) ++resolution;
  const double rad = std::numbers::pi / 180.0;

  std::vector<double> best_u;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(d - 1), 0);
  const int polar_steps = 180 / resolution;  // inclusive of 180 degrees
  const int azimuth_steps = 360 / resolution;
  for (;;) {
    std::vector<double> angles(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) angles[i] = idx[i] * resolution * rad;
    const auto u = unit_from_angles(angles);
    const double value = min_projection(drifts, u);
    if (value > best + 1e-15 ||
        (std::abs(value - best) <= 1e-15 &&
         std::lexicographical_compare(u.begin(), u.end(), best_u.begin(), best_u.end()))) {
      best = value;
      best_u = u;
    }
    // Odometer increment; last angle is the azimuth.
    std::size_t k = 0;
    for (; k < idx.size(); ++k) {
      const int limit = (k + 1 == idx.size()) ? azimuth_steps - 1 : polar_steps;
      if (idx[k] < limit) {
        ++idx[k];
        break;
      }
      idx[k] = 0;
    }
    if (k == idx.size()) break;
  }

  polish(drifts, best_u, resolution * rad);
  best = min_projection(drifts, best_u);

  if (best > kProbabilityTolerance) {
    label = {false, best_u, best};
  } else {
    label = {true, {}, best};
  }
  return label;
}

double annealed_site_moment(const EnvironmentLaw& law,
                            std::span<const std::int64_t> counts) {
  double total = 0.0;
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    double prod = law.weights()[a];
    const auto probs = law.atoms()[a].probs();
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] != 0) prod *= std::pow(probs[s], static_cast<double>(counts[s]));
    }
    total += prod;
  }
  return total;
}

}  // namespace rwre
