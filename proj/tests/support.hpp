#pragma once

#include <cmath>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"

namespace rwre::testing {

inline EnvironmentLaw classical(double p) {
  return make_law(1, {TransitionKernel(1, {p, 1.0 - p})}, {1.0});
}

inline EnvironmentLaw two_atom(double p1, double p2) {
  return make_law(1, {TransitionKernel(1, {p1, 1.0 - p1}), TransitionKernel(1, {p2, 1.0 - p2})},
                  {0.5, 0.5});
}

inline const std::vector<double>& right() {
  static const std::vector<double> u{1.0};
  return u;
}

inline CycleEnsemble harvest(const EnvironmentLaw& law, std::uint64_t seed,
                             std::size_t n_cycles = 100000, std::size_t runs = 8) {
  HarvestOptions opts;
  opts.seed = seed;
  opts.n_cycles = n_cycles;
  opts.runs = runs;
  return harvest_cycles(law, right(), opts);
}

// Classical walk closed forms, written out independently of the library.
inline double cramer_lambda(double p, double t) {
  return std::log(p * std::exp(t) + (1.0 - p) * std::exp(-t));
}
inline double cramer_grad(double p, double t) {
  return (p * std::exp(t) - (1.0 - p) * std::exp(-t)) /
         (p * std::exp(t) + (1.0 - p) * std::exp(-t));
}
inline double cramer_rate(double p, double x) {
  return 0.5 * (1 + x) * std::log((1 + x) / (2 * p)) +
         0.5 * (1 - x) * std::log((1 - x) / (2 * (1 - p)));
}

}  // namespace rwre::testing

#include <optional>

#include "rwre/error.hpp"

namespace rwre::testing {

template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace rwre::testing
