#include <benchmark/benchmark.h>

#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/lmgf.hpp"
#include "rwre/oracle.hpp"
#include "rwre/rate.hpp"

namespace {

rwre::EnvironmentLaw classical() {
  return rwre::make_law(1, {rwre::TransitionKernel(1, {0.6, 0.4})}, {1.0});
}

rwre::EnvironmentLaw two_atom() {
  return rwre::make_law(1, {rwre::TransitionKernel(1, {0.7, 0.3}), rwre::TransitionKernel(1, {0.8, 0.2})},
                        {0.5, 0.5});
}

rwre::CycleEnsemble ensemble(std::size_t n) {
  rwre::HarvestOptions o;
  o.n_cycles = n;
  o.seed = 42;
  return rwre::harvest_cycles(classical(), std::vector<double>{1.0}, o);
}

void BM_Harvest(benchmark::State& state) {
  const auto law = two_atom();
  rwre::HarvestOptions o;
  o.n_cycles = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    o.seed++;
    benchmark::DoNotOptimize(rwre::harvest_cycles(law, std::vector<double>{1.0}, o).size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Harvest)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_LambdaHat(benchmark::State& state) {
  const auto e = ensemble(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> theta{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(rwre::lambda_hat(e, theta).lambda);
}
BENCHMARK(BM_LambdaHat)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_RateAt(benchmark::State& state) {
  const auto e = ensemble(100000);
  const std::vector<double> xi{0.4};
  for (auto _ : state) benchmark::DoNotOptimize(rwre::rate_at(e, xi).rate);
}
BENCHMARK(BM_RateAt)->Unit(benchmark::kMillisecond);

void BM_Enumeration(benchmark::State& state) {
  const auto law = two_atom();
  const std::vector<double> theta{0.5};
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rwre::exact_annealed_expectation(law, theta, n).value);
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_Enumeration)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
