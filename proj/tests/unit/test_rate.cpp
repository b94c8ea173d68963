#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support.hpp"
#include "rwre/lmgf.hpp"
#include "rwre/rate.hpp"

using namespace rwre;
using rwre::testing::cramer_grad;
using rwre::testing::error_kind;

namespace {

const CycleEnsemble& classical_ensemble() {
  static const CycleEnsemble e = rwre::testing::harvest(rwre::testing::classical(0.6), 201);
  return e;
}

double solomon(double p1, double p2) {
  const double rho = 0.5 * ((1 - p1) / p1 + (1 - p2) / p2);
  return (1 - rho) / (1 + rho);
}

}  // namespace

TEST_CASE("LLN velocity") {
  auto v = lln_velocity(classical_ensemble());
  CHECK(std::abs(v.velocity[0] - 0.2) <= 3 * v.std_error[0]);
  auto e = rwre::testing::harvest(rwre::testing::two_atom(0.7, 0.8), 203);
  auto w = lln_velocity(e);
  CHECK(std::abs(w.velocity[0] - solomon(0.7, 0.8)) <= 3 * w.std_error[0]);
  CHECK(w.velocity[0] > 0.0);
}

TEST_CASE("invert_velocity") {
  const auto& e = classical_ensemble();
  const auto v = lln_velocity(e);
  InvertOptions opts;
  CHECK(std::abs(invert_velocity(e, v.velocity, opts)[0]) < opts.tol);

  // theta(0.2) is zero up to the sampling error of the velocity.
  const auto t0 = invert_velocity(e, std::vector<double>{0.2}, opts);
  const double h0 = estimate_lmgf(e, t0).hessian(0, 0);
  CHECK(std::abs(t0[0]) <= 3 * v.std_error[0] / h0);

  CHECK(invert_velocity(e, std::vector<double>{cramer_grad(0.6, 0.5)}, opts)[0] ==
        doctest::Approx(0.5).epsilon(0.02 / 0.5));

  // Inside the hull of step velocities theta(xi) stays finite.
  const double exact = std::atanh(0.99) - 0.5 * std::log(1.5);
  CHECK(invert_velocity(e, std::vector<double>{0.99}, opts)[0] == doctest::Approx(exact).epsilon(0.1 / exact));

  // Beyond it the iterates diverge.
  const auto kind = error_kind([&] { invert_velocity(e, std::vector<double>{1.05}, opts); });
  REQUIRE(kind.has_value());
  CHECK((*kind == ErrorKind::NoConvergence || *kind == ErrorKind::LeftRegionC));
}

TEST_CASE("invert_velocity round trip") {
  const auto& e = classical_ensemble();
  InvertOptions opts;
  for (double t : {0.1, 0.4, 0.7}) {
    const std::vector<double> th{t};
    const auto g = grad_lambda(e, th, lambda_hat(e, th).lambda).grad;
    CHECK(std::abs(invert_velocity(e, g, opts)[0] - t) <= 2 * opts.tol);
  }
}

TEST_CASE("rate_at on the classical walk") {
  const auto& e = classical_ensemble();
  const auto v = lln_velocity(e);
  auto zero = rate_at(e, v.velocity);
  CHECK(zero.rate >= -1e-12);
  CHECK(zero.rate <= 3 * zero.rate_se + 1e-12);

  auto half = rate_at(e, std::vector<double>{0.5});
  CHECK(std::abs(half.rate - 0.0499) <= 0.005);
  CHECK(half.rate_hessian_min_eigenvalue > 0.0);
  CHECK(half.fenchel_gap <= 3 * half.rate_se);
  CHECK(half.fenchel_points > 1);

  auto typical = rate_at(e, std::vector<double>{0.2});
  CHECK(typical.rate == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(typical.rate_hessian(0, 0) == doctest::Approx(1.0 / 0.96).epsilon(0.05));
}

TEST_CASE("rate curve") {
  auto curve = rate_curve(classical_ensemble(), {{0.3}, {0.4}, {0.5}, {1.05}});
  REQUIRE(curve.rows.size() == 4);
  const double expect[] = {0.00508, 0.02122, 0.04985};
  for (int i = 0; i < 3; ++i) {
    const auto& row = curve.rows[static_cast<std::size_t>(i)];
    REQUIRE(row.status == "ok");
    CHECK(std::abs(row.point->rate - expect[i]) <= 0.005);
    CHECK(std::abs(row.point->rate - rwre::testing::cramer_rate(0.6, row.xi[0])) <= 0.005);
    CHECK(row.point->rate_hessian_min_eigenvalue > 0.0);
    CHECK(row.point->fenchel_gap <= 3 * row.point->rate_se);
  }
  CHECK(curve.rows[3].status != "ok");
  CHECK_FALSE(curve.rows[3].point.has_value());
  const auto& r = curve.rows;
  const double second = r[0].point->rate - 2 * r[1].point->rate + r[2].point->rate;
  const double se = std::sqrt(std::pow(r[0].point->rate_se, 2) + 4 * std::pow(r[1].point->rate_se, 2) +
                              std::pow(r[2].point->rate_se, 2));
  CHECK(second >= -3 * se);

  CHECK(error_kind([] { rate_curve(classical_ensemble(), {{0.3}, {0.3}}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("nestling boundary probe in d = 1") {
  auto law = rwre::testing::two_atom(0.85, 0.4);
  HarvestOptions opts;
  opts.seed = 207;
  auto probe = nestling_boundary_probe(law, rwre::testing::right(), {{0.1}, {0.05}, {0.02}, {0.0}}, opts);
  REQUIRE(probe.points.size() == 4);
  double prev = 1.0;
  for (int i = 0; i < 3; ++i) {
    const auto& p = probe.points[static_cast<std::size_t>(i)];
    REQUIRE(p.label.region == Region::InteriorC);
    REQUIRE(p.grad.has_value());
    CHECK((*p.grad)[0] < prev);
    CHECK((*p.grad)[0] > probe.velocity.velocity[0]);
    prev = (*p.grad)[0];
  }
  const auto& origin = probe.points[3];
  CHECK(origin.label.region == Region::BoundaryCb);
  REQUIRE(origin.extended_grad.has_value());
  CHECK((*origin.extended_grad)[0] == doctest::Approx(probe.velocity.velocity[0]).epsilon(1e-12));
  CHECK_FALSE(probe.normal_inner_product.has_value());

  CHECK(error_kind([] {
          nestling_boundary_probe(rwre::testing::classical(0.6), rwre::testing::right(), {{0.1}}, {});
        }) == ErrorKind::InvalidArgument);
}

TEST_CASE("nestling boundary probe in d = 2") {
  // Drifts (0.4, 0) and (-0.2, 0): nestling, transient along +x.
  auto law = make_law(2,
                      {TransitionKernel(2, {0.5, 0.1, 0.2, 0.2}), TransitionKernel(2, {0.2, 0.4, 0.2, 0.2})},
                      {0.5, 0.5});
  REQUIRE(classify_nestling(law).is_nestling());
  HarvestOptions opts;
  opts.seed = 211;
  opts.n_cycles = 20000;
  const std::vector<double> u{1.0, 0.0};
  auto probe = nestling_boundary_probe(law, u, {{0.05, 0.0}, {0.0, 0.0}}, opts);
  REQUIRE(probe.normal_inner_product.has_value());
  CHECK(*probe.normal_inner_product > 0.0);
  REQUIRE(probe.points[1].extended_grad.has_value());
  CHECK((*probe.points[1].extended_grad)[0] == doctest::Approx(probe.velocity.velocity[0]).epsilon(1e-12));
}
