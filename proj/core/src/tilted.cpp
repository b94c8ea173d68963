#include "rwre/tilted.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/stats.hpp"

namespace rwre {

CylinderFunction::CylinderFunction(std::size_t depth, Fn fn, double bound)
    : depth_(depth), fn_(std::move(fn)), bound_(bound) {
  if (depth_ == 0) raise(ErrorKind::InvalidArgument, "cylinder depth must be positive");
}

CylinderFunction CylinderFunction::from_table(std::size_t depth, int dimension,
                                              const std::map<std::string, double>& table) {
  std::map<std::vector<std::uint8_t>, double> keyed;
  double bound = 0.0;
  for (const auto& [text, value] : table) {
    auto steps = decode_steps(text, dimension);
    if (steps.size() != depth) {
      raise(ErrorKind::InvalidConfig, "cylinder key '" + text + "' does not have length " +
                                          std::to_string(depth));
    }
    keyed[std::move(steps)] = value;
    bound = std::max(bound, std::abs(value));
  }
  return CylinderFunction(
      depth,
      [keyed = std::move(keyed)](std::span<const std::uint8_t> s) {
        const auto it = keyed.find(std::vector<std::uint8_t>(s.begin(), s.end()));
        return it == keyed.end() ? 0.0 : it->second;
      },
      bound);
}

CylinderFunction CylinderFunction::constant(double c) {
  return CylinderFunction(1, [c](std::span<const std::uint8_t>) { return c; }, std::abs(c));
}

CylinderFunction CylinderFunction::first_step_is(Step step) {
  const auto idx = static_cast<std::uint8_t>(step.index());
  return CylinderFunction(
      1, [idx](std::span<const std::uint8_t> s) { return s[0] == idx ? 1.0 : 0.0; }, 1.0);
}

CylinderFunction CylinderFunction::first_step_coordinate(int axis) {
  return CylinderFunction(
      1,
      [axis](std::span<const std::uint8_t> s) {
        const Step z(s[0]);
        return z.axis() == axis ? static_cast<double>(z.sign()) : 0.0;
      },
      1.0);
}

CylinderFunction CylinderFunction::linear_combination(double a, const CylinderFunction& f,
                                                      double b, const CylinderFunction& g) {
  return CylinderFunction(
      std::max(f.depth(), g.depth()),
      [a, f, b, g](std::span<const std::uint8_t> s) { return a * f(s) + b * g(s); },
      std::abs(a) * f.bound() + std::abs(b) * g.bound());
}

CylinderFunction read_cylinder_table(std::istream& in, int dimension) {
  std::map<std::string, double> table;
  std::size_t depth = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      raise(ErrorKind::InvalidConfig, "cylinder table line " + std::to_string(lineno) + ": no comma");
    }
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (key == "steps") continue;
    double v = 0.0;
    try {
      v = std::stod(value);
    } catch (const std::exception&) {
      raise(ErrorKind::InvalidConfig, "cylinder table line " + std::to_string(lineno) + ": bad value");
    }
    if (depth == 0) depth = key.size();
    table[key] = v;
  }
  if (table.empty()) raise(ErrorKind::InvalidConfig, "cylinder table is empty");
  return CylinderFunction::from_table(depth, dimension, table);
}

std::int64_t VisitCounts::total() const {
  std::int64_t t = 0;
  for (const auto c : counts) t += c;
  return t;
}

VisitCounts visit_counts_at_endpoint(const Path& past) {
  VisitCounts out;
  out.counts.assign(static_cast<std::size_t>(step_count(past.dimension())), 0);
  const auto pos = past.positions();
  const Point& here = pos.back();
  for (std::size_t k = 0; k + 1 < pos.size(); ++k) {
    if (pos[k] == here) ++out.counts[past.steps()[k]];
  }
  return out;
}

std::vector<double> annealed_kernel_q(const EnvironmentLaw& law, const VisitCounts& counts) {
  const auto n = static_cast<std::size_t>(step_count(law.dimension()));
  if (counts.counts.size() != n) raise(ErrorKind::InvalidArgument, "visit counts need 2d entries");
  for (const auto c : counts.counts) {
    if (c < 0) raise(ErrorKind::InvalidArgument, "negative visit count");
  }
  const double denom = annealed_site_moment(law, counts.counts);
  std::vector<double> q(n);
  std::vector<std::int64_t> bumped = counts.counts;
  for (std::size_t z = 0; z < n; ++z) {
    ++bumped[z];
    q[z] = annealed_site_moment(law, bumped) / denom;
    --bumped[z];
  }
  return q;
}

namespace {

struct BlockSums {
  std::vector<double> num;
  std::vector<double> den;
};

BlockSums block_sums(const CycleEnsemble& ensemble, std::span<const double> theta, double lambda,
                     const CylinderFunction& f, BlockScheme scheme, std::size_t K) {
  if (static_cast<int>(theta.size()) != ensemble.dimension()) {
    raise(ErrorKind::InvalidArgument, "theta has wrong dimension");
  }
  BlockSums out;
  const auto d = static_cast<std::size_t>(ensemble.dimension());
  for (const auto& run : ensemble.runs()) {
    if (run.size() < K) continue;
    const std::size_t stride = scheme == BlockScheme::NonOverlapping ? K : 1;
    for (std::size_t b = run.begin; b + K <= run.end; b += stride) {
      double exponent = 0.0;
      for (std::size_t c = b; c < b + K; ++c) {
        const auto x = ensemble.displacement(c);
        for (std::size_t k = 0; k < d; ++k) exponent += theta[k] * static_cast<double>(x[k]);
        exponent -= lambda * static_cast<double>(ensemble.duration(c));
      }
      if (!(exponent < 700.0)) {
        raise(ErrorKind::NonFiniteWeight, "block weight exponent " + std::to_string(exponent));
      }
      const double w = std::exp(exponent);
      const auto steps = ensemble.steps(b, b + K);
      const auto tau1 = static_cast<std::size_t>(ensemble.duration(b));
      double fsum = 0.0;
      for (std::size_t j = 0; j < tau1; ++j) fsum += f(steps.subspan(j, K));
      out.num.push_back(fsum * w);
      out.den.push_back(static_cast<double>(tau1) * w);
    }
  }
  if (out.num.empty()) {
    raise(ErrorKind::InsufficientRunLength,
          "no run has " + std::to_string(K) + " consecutive cycles");
  }
  return out;
}

}  // namespace

TiltedEstimate tilted_cylinder(const CycleEnsemble& ensemble, std::span<const double> theta,
                               double lambda, const CylinderFunction& f, BlockScheme scheme,
                               std::size_t depth) {
  const std::size_t K = std::max(depth, f.depth());
  const auto sums = block_sums(ensemble, theta, lambda, f, scheme, K);

  TiltedEstimate out;
  out.K_used = K;
  out.n_blocks = sums.num.size();
  if (scheme == BlockScheme::NonOverlapping) {
    const auto r = ratio_estimate(sums.num, sums.den);
    out.value = r.mean;
    out.std_error = r.std_error;
    return out;
  }

  double sn = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < sums.num.size(); ++i) {
    sn += sums.num[i];
    sd += sums.den[i];
  }
  out.value = sn / sd;
  std::vector<double> resid(sums.num.size());
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = sums.num[i] - out.value * sums.den[i];
  const auto batches = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::sqrt(static_cast<double>(resid.size()))));
  const auto bm = batch_mean_estimate(resid, batches);
  out.std_error = bm.std_error / (sd / static_cast<double>(resid.size()));
  return out;
}

std::vector<TiltedEstimate> mean_drift_tilted(const CycleEnsemble& ensemble,
                                              std::span<const double> theta, double lambda) {
  std::vector<TiltedEstimate> out;
  for (int axis = 0; axis < ensemble.dimension(); ++axis) {
    out.push_back(tilted_cylinder(ensemble, theta, lambda,
                                  CylinderFunction::first_step_coordinate(axis)));
  }
  return out;
}

std::vector<TiltedEstimate> k_consistency_check(const CycleEnsemble& ensemble,
                                                std::span<const double> theta, double lambda,
                                                const CylinderFunction& f, std::size_t K_max,
                                                BlockScheme scheme) {
  if (K_max < f.depth()) raise(ErrorKind::InvalidArgument, "K_max below the cylinder depth");
  std::vector<TiltedEstimate> out;
  for (std::size_t K = f.depth(); K <= K_max; ++K) {
    out.push_back(tilted_cylinder(ensemble, theta, lambda, f, scheme, K));
  }
  return out;
}

EmpiricalEstimate empirical_process(const Path& path, const CylinderFunction& f,
                                    std::size_t batches) {
  const std::size_t K = f.depth();
  if (path.size() <= K) {
    raise(ErrorKind::PathTooShort, "path of length " + std::to_string(path.size()) +
                                       " needs more than " + std::to_string(K) + " steps");
  }
  const std::size_t windows = path.size() - K;
  std::vector<double> series(windows);
  const auto steps = path.steps();
  for (std::size_t j = 0; j < windows; ++j) series[j] = f(steps.subspan(j, K));
  const auto bm = batch_mean_estimate(series, batches);
  return {bm.mean, bm.std_error, windows};
}

}  // namespace rwre
