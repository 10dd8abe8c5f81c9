#include <doctest.h>

#include "blockprobe/parallel.hpp"
#include "blockprobe/presets.hpp"
#include "blockprobe/rng.hpp"
#include "blockprobe/stats.hpp"

using namespace blockprobe;

TEST_CASE("parallel Monte Carlo is bit-identical across job counts") {
  const auto model = make_preset("planted-2x7");
  const std::vector<double> w(7, 0.97);
  const double one = monte_carlo_error_variance_parallel(model, 1, w, 20000, 5, 1);
  for (std::size_t jobs : {2u, 3u, 8u}) {
    CHECK(monte_carlo_error_variance_parallel(model, 1, w, 20000, 5, jobs) == one);
  }
  CHECK(monte_carlo_error_variance_parallel(model, 1, w, 20000, 6, 2) != one);
}

TEST_CASE("parallel Monte Carlo matches the chunked serial reference") {
  const auto model = make_preset("uniform");
  const std::vector<double> w(7, 1.01);
  const std::size_t draws = 2 * kMonteCarloChunk + 100;
  ComponentMoments total(model.dim());
  for (std::size_t c = 0; c * kMonteCarloChunk < draws; ++c) {
    const std::size_t size = std::min(kMonteCarloChunk, draws - c * kMonteCarloChunk);
    Rng rng(derive_seed(9, "mc-chunk", c));
    ComponentMoments chunk(model.dim());
    for (std::size_t k = 0; k < size; ++k) {
      const auto s = sample_step(model, 0, rng);
      const auto p = predict_noise(model, 0, s, w);
      std::vector<double> e(p.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = s.eps[i] - p[i];
      chunk.add(e);
    }
    total.merge(chunk);
  }
  const double parallel = monte_carlo_error_variance_parallel(model, 0, w, draws, 9, 4);
  CHECK(parallel == total.mean_variance());
  const double analytic = analytic_error_variance(model, 0, w).exact;
  CHECK(std::abs(parallel - analytic) / analytic < 0.03);
}

TEST_CASE("parallel probes equal the serial probes") {
  const auto model = make_preset("planted-2x7");
  ProbeConfig config;
  config.runs = 6;
  config.perturbations_per_run = 8;
  config.seed = 123;
  const auto serial = run_probes(model, config);
  for (std::size_t jobs : {1u, 3u, 6u}) CHECK(run_probes_parallel(model, config, jobs) == serial);
}

TEST_CASE("parallel stability check equals the serial check") {
  const auto model = make_preset("planted-2x5");
  ProbeConfig config;
  config.runs = 7;
  config.perturbations_per_run = 6;
  const auto runs = rankings_of(std::span<const ProbeRunResult>(run_probes(model, config)));
  Rng a(77), b(77);
  const auto serial = stability_check(std::span<const RankingSequence>(runs), 12, a);
  const auto parallel = stability_check_parallel(std::span<const RankingSequence>(runs), 12, b,
                                                 kDefaultJitterScale, 4);
  CHECK(serial.stable == parallel.stable);
  CHECK(serial.max_prefix_distance == parallel.max_prefix_distance);
  CHECK(serial.orders == parallel.orders);
  CHECK(a() == b());
}

TEST_CASE("parallel strategy evaluation equals the serial evaluation") {
  const auto model = make_preset("planted-2x7");
  const auto strategies = baseline_strategies(2, 7, 1);
  PruningConfig config;
  config.trials = 32;
  config.eval_trials = 32;
  const auto serial = evaluate_strategies(model, strategies, config);
  for (std::size_t jobs : {1u, 4u}) {
    CHECK(evaluate_strategies_parallel(model, strategies, config, jobs) == serial);
  }
}

TEST_CASE("resolve_jobs") {
  CHECK(resolve_jobs(3) == 3);
  CHECK(resolve_jobs(0) >= 1);
}
