#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockprobe/probe.hpp"
#include "blockprobe/pruning.hpp"
#include "blockprobe/surrogate.hpp"
#include "blockprobe/voting.hpp"

// OpenMP kernels. Each mirrors a serial reference and produces results that
// do not depend on the thread count. jobs == 0 means the OpenMP default.

namespace blockprobe {

inline constexpr std::size_t kMonteCarloChunk = 4096;

/// Chunked Monte Carlo: chunk c draws from derive_seed(seed, "mc-chunk", c)
/// and chunk moments are merged in chunk order.
double monte_carlo_error_variance_parallel(const SurrogateModel& model, std::size_t step,
                                           std::span<const double> weights, std::size_t draws,
                                           std::uint64_t seed, std::size_t jobs = 0);

/// Identical output to run_probes.
std::vector<ProbeRunResult> run_probes_parallel(const SurrogateModel& model,
                                                const ProbeConfig& config, std::size_t jobs = 0);

/// Identical output to stability_check with the same rng state.
StabilityReport stability_check_parallel(std::span<const RankingSequence> rankings,
                                         std::size_t traversal_samples, Rng& rng,
                                         double jitter_scale = kDefaultJitterScale,
                                         std::size_t jobs = 0);

/// Identical output to evaluate_strategies.
std::vector<ScoredStrategy> evaluate_strategies_parallel(
    const SurrogateModel& model, std::span<const SkippingStrategy> strategies,
    const PruningConfig& config, std::size_t jobs = 0);

/// Threads an OpenMP region would use for `jobs`.
std::size_t resolve_jobs(std::size_t jobs) noexcept;

}  // namespace blockprobe
