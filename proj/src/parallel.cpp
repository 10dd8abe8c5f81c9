#include "blockprobe/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <optional>

#include "blockprobe/stats.hpp"

namespace blockprobe {

std::size_t resolve_jobs(std::size_t jobs) noexcept {
  if (jobs == 0) return static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  return jobs;
}

namespace {

// Runs body(i) for i in [0, count) on `jobs` threads; rethrows the first
// exception (lowest index) after the loop.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(resolve_jobs(jobs)))
  for (long long i = 0; i < total; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

double monte_carlo_error_variance_parallel(const SurrogateModel& model, std::size_t step,
                                           std::span<const double> weights, std::size_t draws,
                                           std::uint64_t seed, std::size_t jobs) {
  if (draws == 0) throw Error("draws must be positive");
  if (step >= model.steps()) throw Error("step index out of range");
  if (weights.size() != model.blocks()) throw Error("weight row length must equal block count");

  const std::size_t chunks = (draws + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<ComponentMoments> partial(chunks, ComponentMoments(model.dim()));
  parallel_for(chunks, jobs, [&](std::size_t c) {
    Rng rng(derive_seed(seed, "mc-chunk", c));
    const std::size_t begin = c * kMonteCarloChunk;
    const std::size_t end = std::min(draws, begin + kMonteCarloChunk);
    StepSample sample;
    std::vector<double> predicted;
    std::vector<double> error(model.dim());
    for (std::size_t k = begin; k < end; ++k) {
      sample_step_into(model, step, rng, sample);
      predict_noise_into(model, step, sample, weights, {}, predicted);
      for (std::size_t i = 0; i < error.size(); ++i) error[i] = sample.eps[i] - predicted[i];
      partial[c].add(error);
    }
  });

  ComponentMoments total(model.dim());
  for (const auto& p : partial) total.merge(p);
  return total.mean_variance();
}

std::vector<ProbeRunResult> run_probes_parallel(const SurrogateModel& model,
                                                const ProbeConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<ProbeRunResult> out(config.runs);
  parallel_for(config.runs, jobs, [&](std::size_t r) {
    out[r] = run_probe_seeded(model, config, probe_run_seed(config.seed, r));
  });
  return out;
}

StabilityReport stability_check_parallel(std::span<const RankingSequence> rankings,
                                         std::size_t traversal_samples, Rng& rng,
                                         double jitter_scale, std::size_t jobs) {
  if (rankings.size() < kStabilityPrefixes) throw Error("insufficient runs");
  const std::size_t n = rankings.front().steps();
  const Grid<double> jitter = draw_jitter_table(n, rankings.front().blocks(), jitter_scale, rng);

  StabilityReport report;
  report.bound = static_cast<double>(n) / 2.0;
  report.orders = traversal_orders(rankings.size(), traversal_samples, rng);
  std::vector<std::size_t> distances(report.orders.size());
  parallel_for(report.orders.size(), jobs, [&](std::size_t s) {
    distances[s] = prefix_distance(rankings, report.orders[s], jitter);
  });
  report.max_prefix_distance = *std::ranges::max_element(distances);
  report.stable = 2 * report.max_prefix_distance <= n;
  return report;
}

std::vector<ScoredStrategy> evaluate_strategies_parallel(
    const SurrogateModel& model, std::span<const SkippingStrategy> strategies,
    const PruningConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<std::optional<ScoredStrategy>> slots(strategies.size());
  parallel_for(strategies.size(), jobs, [&](std::size_t i) {
    slots[i] = evaluate_strategy(model, strategies[i], config);
  });
  std::vector<ScoredStrategy> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace blockprobe
