#include "rwre/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "rwre/error.hpp"
#include "rwre/walk.hpp"

namespace rwre {

CycleEnsemble::CycleEnsemble(int dimension, std::vector<double> direction)
    : dimension_(dimension), direction_(std::move(direction)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    raise(ErrorKind::InvalidArgument, "ensemble dimension out of range");
  }
  if (static_cast<int>(direction_.size()) != dimension) {
    raise(ErrorKind::InvalidArgument, "direction has wrong dimension");
  }
}

void CycleEnsemble::begin_run() { runs_.push_back({size(), size()}); }

void CycleEnsemble::add_cycle(std::span<const std::uint8_t> steps) {
  if (runs_.empty()) begin_run();
  if (steps.empty()) raise(ErrorKind::InvalidArgument, "empty cycle");
  Point p{};
  for (const auto s : steps) {
    if (s >= step_count(dimension_)) raise(ErrorKind::InvalidArgument, "step outside dimension");
    advance(p, Step(s));
    if (project(p, direction_) < -kLevelTolerance) {
      raise(ErrorKind::InvalidArgument, "cycle drops below its starting level");
    }
  }
  if (!(project(p, direction_) > kLevelTolerance)) {
    raise(ErrorKind::InvalidArgument, "cycle does not gain level");
  }
  durations_.push_back(static_cast<std::int64_t>(steps.size()));
  for (int i = 0; i < dimension_; ++i) displacements_.push_back(p[static_cast<std::size_t>(i)]);
  steps_.insert(steps_.end(), steps.begin(), steps.end());
  step_offsets_.push_back(steps_.size());
  runs_.back().end = size();
}

void CycleEnsemble::append(const CycleEnsemble& other) {
  if (other.dimension_ != dimension_) raise(ErrorKind::InvalidArgument, "dimension mismatch");
  for (std::size_t i = 0; i < direction_.size(); ++i) {
    if (std::abs(other.direction_[i] - direction_[i]) > 1e-12) {
      raise(ErrorKind::InvalidArgument, "direction mismatch");
    }
  }
  for (const auto& run : other.runs_) {
    begin_run();
    for (std::size_t i = run.begin; i < run.end; ++i) add_cycle(other.steps(i));
  }
  starved_walks += other.starved_walks;
  simulated_steps += other.simulated_steps;
}

namespace {

struct WalkOutcome {
  bool starved = false;
  std::size_t steps_simulated = 0;
  std::vector<std::uint8_t> steps;       // steps from tau_1 to tau_{q+1}
  std::vector<std::size_t> boundaries;   // cycle ends, relative to tau_1
};

struct Candidate {
  std::size_t time;
  double level;
};

WalkOutcome run_walk(const EnvironmentLaw& law, std::span<const double> u, std::size_t quota,
                     const HarvestOptions& opt, std::uint64_t slot, std::uint64_t attempt) {
  AnnealedWalker walker(law, StreamRng(opt.seed, slot, attempt));
  std::vector<std::uint8_t> steps;
  std::vector<Candidate> alive;  // strict new maxima not undershot yet; levels increasing
  double max_level = 0.0;

  WalkOutcome out;
  for (std::size_t k = 1;; ++k) {
    const Step s = walker.advance();
    steps.push_back(static_cast<std::uint8_t>(s.index()));
    const double level = project(walker.position(), u);

    while (!alive.empty() && alive.back().level > level + kLevelTolerance) alive.pop_back();
    if (level > max_level + kLevelTolerance) {
      alive.push_back({k, level});
      max_level = level;
    }

    // The open cycle is at least as long as the time since the newest alive candidate.
    const std::size_t anchor = alive.empty() ? 0 : alive.back().time;
    if (k - anchor > opt.cycle_cap) {
      out.starved = true;
      out.steps_simulated = k;
      return out;
    }

    if (alive.size() > quota && alive[quota].level <= level - opt.confirmation_margin) {
      const std::size_t start = alive[0].time;
      const std::size_t stop = alive[quota].time;
      out.steps.assign(steps.begin() + static_cast<std::ptrdiff_t>(start),
                       steps.begin() + static_cast<std::ptrdiff_t>(stop));
      for (std::size_t m = 1; m <= quota; ++m) out.boundaries.push_back(alive[m].time - start);
      out.steps_simulated = k;
      return out;
    }
  }
}

struct SlotResult {
  WalkOutcome walk;
  std::size_t starved = 0;
  std::size_t steps_simulated = 0;
};

}  // namespace

CycleEnsemble harvest_cycles(const EnvironmentLaw& law, std::span<const double> direction,
                             const HarvestOptions& options) {
  const NestlingLabel label = classify_nestling(law);
  if (static_cast<int>(direction.size()) != law.dimension()) {
    raise(ErrorKind::InvalidArgument, "direction has wrong dimension");
  }
  double norm = 0.0;
  for (const double x : direction) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) raise(ErrorKind::InvalidArgument, "zero direction");
  std::vector<double> u(direction.begin(), direction.end());
  if (std::abs(norm - 1.0) > 1e-12) {
    for (double& x : u) x /= norm;
  }
  if (options.n_cycles == 0) raise(ErrorKind::InvalidArgument, "n_cycles must be positive");
  if (options.runs == 0) raise(ErrorKind::InvalidArgument, "runs must be positive");
  if (options.cycle_cap == 0) raise(ErrorKind::InvalidArgument, "cycle_cap must be positive");

  const std::size_t runs = std::min(options.runs, options.n_cycles);
  std::vector<SlotResult> results(runs);
  std::atomic<std::size_t> next_slot{0};
  std::atomic<std::size_t> starved_total{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    try {
      for (;;) {
        const std::size_t slot = next_slot.fetch_add(1);
        if (slot >= runs || abort.load()) return;
        const std::size_t quota =
            options.n_cycles / runs + (slot < options.n_cycles % runs ? 1 : 0);
        SlotResult& res = results[slot];
        for (std::uint64_t attempt = 0;; ++attempt) {
          WalkOutcome w = run_walk(law, u, quota, options, slot, attempt);
          res.steps_simulated += w.steps_simulated;
          if (!w.starved) {
            res.walk = std::move(w);
            break;
          }
          ++res.starved;
          if (starved_total.fetch_add(1) + 1 > options.max_starved_walks || abort.load()) {
            abort.store(true);
            return;
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      abort.store(true);
    }
  };

  unsigned workers = options.workers == 0 ? std::thread::hardware_concurrency() : options.workers;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(runs)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t starved = 0;
  for (const auto& r : results) starved += r.starved;
  if (abort.load()) {
    raise(ErrorKind::RegenerationStarvation,
          std::to_string(starved) + " walks exceeded cycle_cap=" +
              std::to_string(options.cycle_cap) + " steps without a new regeneration (limit " +
              std::to_string(options.max_starved_walks) + ")");
  }

  CycleEnsemble ensemble(law.dimension(), u);
  ensemble.nestling = label.is_nestling();
  ensemble.law_fingerprint = law.fingerprint();
  ensemble.seed = options.seed;
  ensemble.cycle_cap = options.cycle_cap;
  for (const auto& r : results) {
    ensemble.begin_run();
    std::size_t start = 0;
    for (const std::size_t end : r.walk.boundaries) {
      ensemble.add_cycle(std::span(r.walk.steps).subspan(start, end - start));
      start = end;
    }
    ensemble.starved_walks += r.starved;
    ensemble.simulated_steps += r.steps_simulated;
  }
  return ensemble;
}

}  // namespace rwre
