#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blockprobe/core.hpp"
#include "blockprobe/probe.hpp"

namespace blockprobe {

/// Borda-style voting over per-run rankings. A ranking lists blocks from least
/// to most important, so the block at position i gains i + 1.
ScoreMatrix vote(std::span<const RankingSequence> rankings);
ScoreMatrix vote(std::span<const ProbeRunResult> results);

/// vs / (m r), in [1/m, 1].
ScoreMatrix importance_scores(const ScoreMatrix& voting, std::size_t runs);

/// (m r - vs) / (m r), in [0, 1 - 1/m]; complements importance_scores exactly.
ScoreMatrix inverted_importance_scores(const ScoreMatrix& voting, std::size_t runs);

/// Per-step tie-break offsets, drawn once and reused across every aggregate
/// derived within one analysis.
Grid<double> draw_jitter_table(std::size_t steps, std::size_t blocks, double jitter_scale,
                               Rng& rng);

/// Blocks ordered by ascending score + jitter: least important first.
RankingSequence aggregate_ranking(const ScoreMatrix& scores, const Grid<double>& jitter);

struct StabilityReport {
  bool stable = false;
  std::size_t max_prefix_distance = 0;
  /// Largest admissible distance, n / 2 (may be fractional).
  double bound = 0.0;
  /// Traversal orders examined; the first is the natural order.
  std::vector<std::vector<std::size_t>> orders;
};

inline constexpr std::size_t kStabilityPrefixes = 5;

/// Natural order followed by `samples` uniformly shuffled orders of 0..r-1.
std::vector<std::vector<std::size_t>> traversal_orders(std::size_t runs, std::size_t samples,
                                                       Rng& rng);

/// Largest pairwise distance among the aggregates of the last five prefixes
/// of one traversal.
std::size_t prefix_distance(std::span<const RankingSequence> rankings,
                            std::span<const std::size_t> order, const Grid<double>& jitter);

/// Stable iff every sampled traversal keeps its last five prefix aggregates
/// within n / 2 of each other.
StabilityReport stability_check(std::span<const RankingSequence> rankings,
                                std::size_t traversal_samples, Rng& rng,
                                double jitter_scale = kDefaultJitterScale);
StabilityReport stability_check(std::span<const ProbeRunResult> results,
                                std::size_t traversal_samples, Rng& rng,
                                double jitter_scale = kDefaultJitterScale);

std::vector<RankingSequence> rankings_of(std::span<const ProbeRunResult> results);

}  // namespace blockprobe
