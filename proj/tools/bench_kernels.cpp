// Serial references against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "blockprobe/parallel.hpp"
#include "blockprobe/presets.hpp"

namespace bp = blockprobe;

namespace {

const bp::SurrogateModel& model() {
  static const bp::SurrogateModel m = bp::make_preset("planted-2x7");
  return m;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const std::vector<double> w(model().blocks(), 0.9);
  for (auto _ : state) {
    bp::Rng rng(7);
    benchmark::DoNotOptimize(
        bp::monte_carlo_error_variance(model(), 0, w, static_cast<std::size_t>(state.range(0)), rng));
  }
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const std::vector<double> w(model().blocks(), 0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bp::monte_carlo_error_variance_parallel(
        model(), 0, w, static_cast<std::size_t>(state.range(0)), 7, 0));
  }
}

void BM_ProbesSerial(benchmark::State& state) {
  bp::ProbeConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(bp::run_probes(model(), config));
}

void BM_ProbesParallel(benchmark::State& state) {
  bp::ProbeConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(bp::run_probes_parallel(model(), config, 0));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProbesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProbesParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
