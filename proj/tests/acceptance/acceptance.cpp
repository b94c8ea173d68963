// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "experiment/config.hpp"
#include "experiment/runner.hpp"
#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/error.hpp"
#include "rwre/lmgf.hpp"
#include "rwre/oracle.hpp"
#include "rwre/rate.hpp"
#include "rwre/tilted.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

EnvironmentLaw classical(double p) {
  return make_law(1, {TransitionKernel(1, {p, 1.0 - p})}, {1.0});
}

EnvironmentLaw two_atom(double p1, double p2) {
  return make_law(1, {TransitionKernel(1, {p1, 1.0 - p1}), TransitionKernel(1, {p2, 1.0 - p2})},
                  {0.5, 0.5});
}

double closed_lambda(double p, double t) { return std::log(p * std::exp(t) + (1 - p) * std::exp(-t)); }
double closed_grad(double p, double t) {
  return (p * std::exp(t) - (1 - p) * std::exp(-t)) / (p * std::exp(t) + (1 - p) * std::exp(-t));
}
double closed_hessian(double p, double t) { return 1.0 - closed_grad(p, t) * closed_grad(p, t); }

CycleEnsemble harvest(const EnvironmentLaw& law, std::uint64_t seed, std::size_t n = 100000) {
  HarvestOptions o;
  o.seed = seed;
  o.n_cycles = n;
  o.runs = 8;
  return harvest_cycles(law, std::vector<double>{1.0}, o);
}

// Collects the checks of one criterion and prints its line.
class Criterion {
 public:
  explicit Criterion(int id) : id_(id) {}

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_.push_back(what);
    } else {
      notes_.push_back(what);
    }
  }

  void fail(const std::string& what) { check(false, what); }

  bool report() const {
    std::printf("%s criterion %d", pass_ ? "PASS" : "FAIL", id_);
    for (std::size_t i = 0; i < failures_.size(); ++i) std::printf("%s%s", i ? "; " : ": ", failures_[i].c_str());
    for (std::size_t i = 0; i < notes_.size(); ++i) {
      std::printf("%s%s", i ? "; " : (pass_ ? ": " : " | ok: "), notes_[i].c_str());
    }
    std::printf("\n");
    std::fflush(stdout);
    return pass_;
  }

 private:
  int id_;
  bool pass_ = true;
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void guarded(Criterion& c, const std::string& label, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    c.fail(label + " raised " + std::string(e.kind_name()) + " (" + e.what() + ")");
  } catch (const std::exception& e) {
    c.fail(label + " raised " + e.what());
  }
}

constexpr std::uint64_t kSeedA = 20240601;
constexpr std::uint64_t kSeedB = 20240602;
const std::vector<double> kThetas{-0.5, 0.25, 0.5};

const CycleEnsemble& classical_a() {
  static const CycleEnsemble e = harvest(classical(0.6), kSeedA);
  return e;
}

bool criterion1() {
  Criterion c(1);
  const auto t0 = Clock::now();
  guarded(c, "harvest", [&] {
    const auto& e = classical_a();
    for (const double t : kThetas) {
      guarded(c, fmt("lambda_hat(%g)", t), [&] {
        const auto est = lambda_hat(e, std::vector<double>{t});
        const double err = std::abs(est.lambda - closed_lambda(0.6, t));
        const double tol = std::max(0.01, 3 * est.lambda_se);
        c.check(err <= tol, fmt("theta=%g |err|=%.3g tol=%.3g", t, err, tol));
      });
    }
    guarded(c, "estimate_lmgf(0.5)", [&] {
      const auto est = estimate_lmgf(e, std::vector<double>{0.5});
      const double ge = std::abs(est.grad[0] - closed_grad(0.6, 0.5));
      const double he = std::abs(est.hessian(0, 0) - closed_hessian(0.6, 0.5));
      c.check(ge <= 0.02, fmt("grad err %.3g", ge));
      c.check(he <= 0.05, fmt("hessian err %.3g", he));
    });
  });
  const double secs = seconds_since(t0);
  c.check(secs <= 120, fmt("%.1fs", secs));
  return c.report();
}

bool criterion2() {
  Criterion c(2);
  guarded(c, "ensembles", [&] {
    const auto& a = classical_a();
    const auto b = harvest(classical(0.6), kSeedB);
    std::size_t tested = 0;
    for (const double t : kThetas) {
      const std::vector<double> th{t};
      LmgfEstimate est;
      try {
        est = estimate_lmgf(a, th);
      } catch (const Error&) {
        continue;  // only InteriorC points are tested
      }
      ++tested;
      const auto psi = psi_hat(b, th, est.lambda);
      // d psi / d r = -E[tau w] carries the first ensemble's lambda error.
      double tau_w = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        tau_w += static_cast<double>(b.duration(i)) *
                 std::exp(t * static_cast<double>(b.displacement(i)[0]) -
                          est.lambda * static_cast<double>(b.duration(i)));
      }
      tau_w /= static_cast<double>(b.size());
      const double se = std::hypot(psi.std_error, tau_w * est.lambda_se);
      const double dev = std::abs(psi.value - 1.0);
      c.check(dev <= 3 * se, fmt("theta=%g |psi-1|=%.3g 3SE=%.3g", t, dev, 3 * se));
    }
    c.check(tested > 0, fmt("%zu interior points", tested));
    const double psi00 = psi_hat(b, std::vector<double>{0.0}, 0.0).value;
    c.check(psi00 == 1.0, fmt("psi(0,0)=%.17g", psi00));
  });
  return c.report();
}

bool criterion3() {
  Criterion c(3);
  constexpr double h = 1e-3;
  guarded(c, "ensemble", [&] {
    const auto& e = classical_a();
    for (const double t : kThetas) {
      const std::vector<double> th{t};
      LmgfEstimate est;
      try {
        est = estimate_lmgf(e, th);
      } catch (const Error&) {
        continue;
      }
      guarded(c, fmt("theta=%g", t), [&] {
        const auto up = estimate_lmgf(e, std::vector<double>{t + h});
        const auto dn = estimate_lmgf(e, std::vector<double>{t - h});
        const double fd_grad = (up.lambda - dn.lambda) / (2 * h);
        const double fd_hess = (up.grad[0] - dn.grad[0]) / (2 * h);
        const double rg = std::abs(est.grad[0] - fd_grad) / std::abs(fd_grad);
        const double rh = std::abs(est.hessian(0, 0) - fd_hess) / std::abs(fd_hess);
        c.check(rg <= 1e-2, fmt("theta=%g grad rel %.2g", t, rg));
        c.check(rh <= 5e-2, fmt("theta=%g hessian rel %.2g", t, rh));
        c.check(est.min_eigenvalue > 0, fmt("theta=%g min eig %.3g", t, est.min_eigenvalue));
      });
    }
  });
  return c.report();
}

bool criterion4() {
  Criterion c(4);
  const auto t0 = Clock::now();
  const auto law = two_atom(0.3, 0.7);
  const std::vector<double> th{0.5};
  guarded(c, "finite-n comparison", [&] {
    const auto fit = finite_n_lambda(law, th, {8, 10, 12, 14, 16});
    c.check(std::isfinite(fit.lambda), fmt("finite-n fit %.6g", fit.lambda));
    guarded(c, "lambda_hat", [&] {
      const auto e = harvest(law, kSeedA);
      const auto est = lambda_hat(e, th);
      const double diff = std::abs(est.lambda - fit.lambda);
      c.check(diff <= 0.02, fmt("|lambda_hat - fit|=%.3g (fit %.6g)", diff, fit.lambda));
    });
  });
  guarded(c, "exact values", [&] {
    const double v = exact_annealed_expectation(law, std::vector<double>{1.0}, 2).value;
    c.check(std::abs(v - 2.3811) <= 1e-4 && std::isfinite(v), fmt("E[e^{X_2}]=%.12f", v));
    const double m = exact_annealed_expectation(law, std::vector<double>{0.0}, 16).value;
    c.check(std::abs(m - 1.0) <= 1e-12, fmt("mass %.15g", m));
  });
  const double secs = seconds_since(t0);
  c.check(secs <= 60, fmt("%.1fs", secs));
  return c.report();
}

bool criterion5() {
  Criterion c(5);
  guarded(c, "random environment", [&] {
    const auto law = two_atom(0.7, 0.8);
    const double oracle = solomon_velocity(law);
    c.check(std::abs(oracle - 0.49333) <= 1e-5, fmt("Solomon %.6f", oracle));
    const auto v = lln_velocity(harvest(law, kSeedA));
    const double err = std::abs(v.velocity[0] - 0.49333);
    c.check(err <= std::max(0.01, 3 * v.std_error[0]), fmt("{0.7,0.8} xi=%.5f", v.velocity[0]));
  });
  guarded(c, "classical", [&] {
    const auto v = lln_velocity(classical_a());
    const double err = std::abs(v.velocity[0] - 0.2);
    c.check(err <= std::max(0.01, 3 * v.std_error[0]), fmt("p=0.6 xi=%.5f", v.velocity[0]));
  });
  return c.report();
}

bool criterion6() {
  Criterion c(6);
  guarded(c, "rate curve", [&] {
    const auto& e = classical_a();
    const std::vector<double> targets{0.00508, 0.02122, 0.04985};
    const auto curve = rate_curve(e, {{0.3}, {0.4}, {0.5}});
    std::vector<RatePoint> pts;
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
      const auto& row = curve.rows[i];
      if (!row.point) {
        c.fail(fmt("xi=%g: %s", row.xi[0], row.status.c_str()));
        continue;
      }
      const auto& p = *row.point;
      pts.push_back(p);
      const double err = std::abs(p.rate - targets[i]);
      c.check(err <= 0.005, fmt("I(%g)=%.5f", row.xi[0], p.rate));
      c.check(p.fenchel_gap <= 3 * p.rate_se, fmt("gap(%g)=%.2g", row.xi[0], p.fenchel_gap));
    }
    if (pts.size() == 3) {
      const double second = pts[0].rate - 2 * pts[1].rate + pts[2].rate;
      const double se = std::sqrt(pts[0].rate_se * pts[0].rate_se + 4 * pts[1].rate_se * pts[1].rate_se +
                                  pts[2].rate_se * pts[2].rate_se);
      c.check(second >= -3 * se, fmt("second difference %.3g", second));
    }
    const auto xo = lln_velocity(e).velocity;
    const auto at = rate_at(e, xo);
    c.check(at.rate <= 3 * at.rate_se, fmt("I(xi_o)=%.2g", at.rate));
    c.check(at.fenchel_gap <= 3 * at.rate_se, fmt("gap(xi_o)=%.2g", at.fenchel_gap));
  });
  return c.report();
}

bool criterion7() {
  Criterion c(7);
  guarded(c, "tilted measure", [&] {
    const auto& e = classical_a();
    const std::vector<double> th{0.5};
    const auto est = estimate_lmgf(e, th);
    const double lam = est.lambda;
    const auto one = CylinderFunction::constant(1.0);
    bool normalised = true;
    for (auto scheme : {BlockScheme::NonOverlapping, BlockScheme::Overlapping}) {
      for (const auto& k : k_consistency_check(e, th, lam, one, 3, scheme)) normalised &= k.value == 1.0;
    }
    c.check(normalised, "f=1 gives 1");

    const auto up = CylinderFunction::first_step_is(Step::along(0, 1));
    const auto q = tilted_cylinder(e, th, lam, up);
    c.check(std::abs(q.value - 0.8031) <= std::max(0.01, 3 * q.std_error), fmt("q(+1)=%.4f", q.value));

    const auto drift = mean_drift_tilted(e, th, lam);
    const double se = std::hypot(drift[0].std_error, est.grad_se[0]);
    c.check(std::abs(drift[0].value - est.grad[0]) <= 3 * se,
            fmt("drift %.4f grad %.4f", drift[0].value, est.grad[0]));

    const auto ks = k_consistency_check(e, th, lam, up, 3);
    for (std::size_t i = 1; i < ks.size(); ++i) {
      const double d = std::abs(ks[i].value - ks[0].value);
      c.check(d <= 3 * std::hypot(ks[i].std_error, ks[0].std_error), fmt("K=%zu diff %.2g", i + 1, d));
    }
  });
  return c.report();
}

bool criterion8() {
  Criterion c(8);
  guarded(c, "empirical process", [&] {
    const auto& e = classical_a();
    const auto path = sample_walk(classical(0.6), kSeedB, 1000000);
    const std::vector<double> zero{0.0};
    const std::vector<std::pair<std::string, CylinderFunction>> fs{
        {"depth 1", CylinderFunction::first_step_is(Step::along(0, 1))},
        {"depth 2", CylinderFunction::from_table(2, 1, {{"XX", 1.0}, {"xX", 0.5}})}};
    for (const auto& [name, f] : fs) {
      const auto a = empirical_process(path, f);
      const auto b = tilted_cylinder(e, zero, 0.0, f);
      const double se = std::hypot(a.std_error, b.std_error);
      c.check(std::abs(a.value - b.value) <= 3 * se, fmt("%s %.5f vs %.5f", name.c_str(), a.value, b.value));
    }
  });
  return c.report();
}

bool criterion9() {
  Criterion c(9);
  guarded(c, "nestling", [&] {
    const auto law = two_atom(0.85, 0.4);
    const auto label = classify_nestling(law);
    c.check(label.is_nestling(), "labelled nestling");
    const auto e = harvest(law, kSeedA);
    const std::vector<std::pair<double, Region>> expect{
        {0.1, Region::InteriorC}, {-0.1, Region::OutsideC}, {0.0, Region::BoundaryCb}};
    for (const auto& [t, r] : expect) {
      const auto got = classify_theta(e, std::vector<double>{t}, true);
      c.check(got.region == r, fmt("theta=%g %s", t, std::string(region_name(got.region)).c_str()));
    }
    const double solomon = solomon_velocity(law);
    c.check(std::abs(solomon - 0.0880) <= 5e-4, fmt("Solomon %.4f", solomon));
    std::vector<double> grads;
    for (const double t : {0.10, 0.05, 0.02}) {
      guarded(c, fmt("grad(%g)", t), [&] {
        const auto est = lambda_hat(e, std::vector<double>{t});
        grads.push_back(grad_lambda(e, std::vector<double>{t}, est.lambda).grad[0]);
      });
    }
    if (grads.size() == 3) {
      c.check(grads[0] > grads[1] && grads[1] > grads[2],
              fmt("grads %.4f %.4f %.4f", grads[0], grads[1], grads[2]));
      const double gap = std::abs(grads[2] - solomon);
      c.check(gap <= 0.05, fmt("final gap %.3f", gap));
    }
  });
  return c.report();
}

bool criterion10() {
  Criterion c(10);
  guarded(c, "experiment", [&] {
    const std::string text = R"(
law:
  dimension: 1
  atoms: [{+x: 0.7, -x: 0.3}, {+x: 0.8, -x: 0.2}]
  weights: [0.5, 0.5]
direction: auto
task: rate-curve
xi: [0.5, 0.6]
n_cycles: 20000
runs: 8
seed: 99
output: {csv: rate.csv, provenance: rate.json}
)";
    const auto config = cli::parse_config(text);
    const auto base = std::filesystem::temp_directory_path() / "rwre_acceptance";
    std::filesystem::remove_all(base);
    std::vector<std::string> outputs;
    for (const unsigned workers : {1u, 2u, 1u}) {
      const auto dir = base / std::to_string(outputs.size());
      std::filesystem::create_directories(dir);
      cli::run_experiment(config, {.out_dir = dir, .workers = workers});
      std::ifstream in(dir / "rate.csv", std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      outputs.push_back(ss.str());
    }
    c.check(!outputs[0].empty(), fmt("%zu bytes", outputs[0].size()));
    c.check(outputs[0] == outputs[1], "workers 1 vs 2 identical");
    c.check(outputs[0] == outputs[2], "rerun identical");
  });
  return c.report();
}

}  // namespace

int main() {
  const std::vector<bool (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                         criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (const auto run : criteria) failed += run() ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
