#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "../support.hpp"
#include "rwre/lmgf.hpp"
#include "rwre/rate.hpp"
#include "rwre/tilted.hpp"
#include "rwre/walk.hpp"

using namespace rwre;
using rwre::testing::error_kind;

namespace {

const CycleEnsemble& classical_ensemble() {
  static const CycleEnsemble e = rwre::testing::harvest(rwre::testing::classical(0.6), 301);
  return e;
}

const Step kUp = Step::along(0, 1);

double tilted_up(double t) {
  return 0.6 * std::exp(t) / (0.6 * std::exp(t) + 0.4 * std::exp(-t));
}

}  // namespace

TEST_CASE("annealed kernel q") {
  auto law = rwre::testing::two_atom(0.3, 0.7);
  auto q0 = annealed_kernel_q(law, VisitCounts{{0, 0}});
  CHECK(q0[0] == doctest::Approx(0.5).epsilon(1e-14));
  auto q1 = annealed_kernel_q(law, VisitCounts{{1, 0}});
  CHECK(q1[0] == doctest::Approx(0.29 / 0.5).epsilon(1e-14));
  CHECK(q1[0] + q1[1] == doctest::Approx(1.0).epsilon(1e-12));

  auto single = rwre::testing::classical(0.6);
  for (std::int64_t a = 0; a < 5; ++a) {
    auto q = annealed_kernel_q(single, VisitCounts{{a, 4 - a}});
    CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-14));
  }

  // Ellipticity survives conditioning.
  for (std::int64_t a = 0; a < 30; a += 3) {
    for (std::int64_t b = 0; b < 30; b += 7) {
      auto q = annealed_kernel_q(law, VisitCounts{{a, b}});
      CHECK(q[0] >= law.kappa() - 1e-15);
      CHECK(q[1] >= law.kappa() - 1e-15);
    }
  }

  // Counts read off a path's past at its endpoint.
  std::vector<std::uint8_t> steps{0, 1, 0, 1};
  auto counts = visit_counts_at_endpoint(Path(1, steps));
  CHECK(counts.counts == std::vector<std::int64_t>{2, 0});
  CHECK(counts.total() == 2);
}

TEST_CASE("normalization") {
  const auto& e = classical_ensemble();
  const auto one = CylinderFunction::constant(1.0);
  for (double t : {0.0, 0.25, 0.5}) {
    const std::vector<double> th{t};
    const double lam = lambda_hat(e, th).lambda;
    for (auto scheme : {BlockScheme::NonOverlapping, BlockScheme::Overlapping}) {
      for (const auto& k : k_consistency_check(e, th, lam, one, 3, scheme)) CHECK(k.value == 1.0);
    }
  }
}

TEST_CASE("tilted step probability") {
  const auto& e = classical_ensemble();
  const auto up = CylinderFunction::first_step_is(kUp);
  auto typical = tilted_cylinder(e, std::vector<double>{0.0}, 0.0, up);
  CHECK(std::abs(typical.value - 0.6) <= 3 * typical.std_error);

  const std::vector<double> th{0.5};
  const double lam = lambda_hat(e, th).lambda;
  auto tilted = tilted_cylinder(e, th, lam, up);
  CHECK(std::abs(tilted.value - tilted_up(0.5)) <= std::max(0.01, 3 * tilted.std_error));
  CHECK(tilted.K_used == 1);
  CHECK(tilted.n_blocks == e.size());
}

TEST_CASE("mean drift under the tilt equals the gradient") {
  const auto& e = classical_ensemble();
  auto zero = mean_drift_tilted(e, std::vector<double>{0.0}, 0.0);
  const auto v = lln_velocity(e);
  CHECK(std::abs(zero[0].value - v.velocity[0]) <= 3 * zero[0].std_error);

  const std::vector<double> th{0.5};
  const double lam = lambda_hat(e, th).lambda;
  auto drift = mean_drift_tilted(e, th, lam);
  CHECK(std::abs(drift[0].value - 0.6061) <= 0.01);
  const auto g = grad_lambda(e, th, lam);
  CHECK(std::abs(drift[0].value - g.grad[0]) <= 3 * std::hypot(drift[0].std_error, g.std_error[0]));
}

TEST_CASE("K-consistency") {
  const auto& e = classical_ensemble();
  const std::vector<double> th{0.5};
  const double lam = lambda_hat(e, th).lambda;
  const auto up = CylinderFunction::first_step_is(kUp);
  auto ks = k_consistency_check(e, th, lam, up, 3);
  REQUIRE(ks.size() == 3);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(ks[i].K_used == i + 1);
    CHECK(std::abs(ks[i].value - tilted_up(0.5)) <= std::max(0.01, 3 * ks[i].std_error));
    if (i > 0) CHECK(std::abs(ks[i].value - ks[i - 1].value) <= 3 * std::hypot(ks[i].std_error, ks[i - 1].std_error));
  }
  auto over = k_consistency_check(e, th, lam, up, 3, BlockScheme::Overlapping);
  for (std::size_t i = 0; i < over.size(); ++i) {
    CHECK(std::abs(over[i].value - ks[i].value) <= 3 * std::max(over[i].std_error, ks[i].std_error));
  }
}

TEST_CASE("linearity and positivity on shared blocks") {
  const auto& e = classical_ensemble();
  const std::vector<double> th{0.3};
  const double lam = lambda_hat(e, th).lambda;
  const auto f = CylinderFunction::from_table(2, 1, {{"XX", 1.0}, {"xX", 0.5}});
  const auto g = CylinderFunction::first_step_coordinate(0);
  const auto h = CylinderFunction::linear_combination(2.0, f, -3.0, g);
  const double a = tilted_cylinder(e, th, lam, f).value;
  const double b = tilted_cylinder(e, th, lam, g, BlockScheme::NonOverlapping, 2).value;
  const double c = tilted_cylinder(e, th, lam, h).value;
  CHECK(c == doctest::Approx(2.0 * a - 3.0 * b).epsilon(1e-12));
  CHECK(a >= 0.0);
  CHECK(std::abs(a) <= f.bound() + 3 * tilted_cylinder(e, th, lam, f).std_error);
}

TEST_CASE("runs too short for the block length") {
  CycleEnsemble e(1, {1.0});
  const std::vector<std::uint8_t> up{0};
  for (int r = 0; r < 5; ++r) {
    e.begin_run();
    e.add_cycle(up);
  }
  const auto two = CylinderFunction::from_table(2, 1, {{"XX", 1.0}});
  CHECK(error_kind([&] { tilted_cylinder(e, std::vector<double>{0.0}, 0.0, two); }) ==
        ErrorKind::InsufficientRunLength);
}

TEST_CASE("empirical process") {
  auto law = rwre::testing::classical(0.6);
  auto path = sample_walk(law, 303, 1000000);
  CHECK(empirical_process(path, CylinderFunction::constant(2.5)).value == 2.5);
  const auto up = CylinderFunction::first_step_is(kUp);
  CHECK(std::abs(empirical_process(path, up).value - 0.6) <= 0.002);

  const auto& e = classical_ensemble();
  const std::vector<double> zero{0.0};
  for (const auto& f : {up, CylinderFunction::from_table(2, 1, {{"XX", 1.0}, {"xX", 0.5}})}) {
    auto a = empirical_process(path, f);
    auto b = tilted_cylinder(e, zero, 0.0, f);
    CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error));
  }
  Path tiny(1, {0});
  CHECK(error_kind([&] { empirical_process(tiny, up); }) == ErrorKind::PathTooShort);
}

TEST_CASE("cylinder tables") {
  std::istringstream in("# pairs of steps\nsteps,value\nXX,1\nxX,0.25\n");
  auto f = read_cylinder_table(in, 1);
  CHECK(f.depth() == 2);
  const std::vector<std::uint8_t> a{0, 0, 1};
  const std::vector<std::uint8_t> b{1, 0};
  const std::vector<std::uint8_t> c{1, 1};
  CHECK(f(a) == 1.0);
  CHECK(f(b) == 0.25);
  CHECK(f(c) == 0.0);
  CHECK(f.bound() == 1.0);
}
