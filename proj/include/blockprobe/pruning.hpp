#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockprobe/core.hpp"
#include "blockprobe/surrogate.hpp"

namespace blockprobe {

enum class StrategyOrigin { recommended, baseline_static, baseline_symmetric, manual };

const char* to_string(StrategyOrigin origin) noexcept;
StrategyOrigin strategy_origin_from_string(const std::string& text);

struct SkippingStrategy {
  std::string name;
  /// Sorted skipped block indices per step.
  std::vector<std::vector<std::size_t>> per_step;
  StrategyOrigin origin = StrategyOrigin::manual;
  /// Set on a recommended strategy that coincides with a baseline.
  bool overlaps_baseline = false;

  bool operator==(const SkippingStrategy&) const = default;
};

/// Throws Error unless every index < m, every set has at most 3 distinct
/// entries and there is one set per step.
void validate_strategy(const SkippingStrategy& strategy, std::size_t steps,
                       std::size_t blocks);

/// Per step, the `count` lowest-scoring blocks (jitter-broken ties), lowest first.
std::vector<std::vector<std::size_t>> lowest_blocks(const ScoreMatrix& importance,
                                                    std::size_t count, const Grid<double>& jitter);

inline constexpr std::size_t kCandidatePool = 3;

struct StrategyDesign {
  /// Number of DFS leaves, (C(3, k))^n.
  std::size_t raw_count = 0;
  /// Distinct strategies in DFS order.
  std::vector<SkippingStrategy> strategies;
};

/// DFS over every per-step choice of k blocks from that step's three lowest.
StrategyDesign design_strategies(const ScoreMatrix& importance, std::size_t k,
                                 const Grid<double>& jitter);

/// Same k-subset at every step (static), plus mirror pairs (i, m-1-i) when
/// k == 2 (symmetric). Static strategies exclude the mirror pairs.
std::vector<SkippingStrategy> baseline_strategies(std::size_t steps, std::size_t blocks,
                                                  std::size_t k);

/// Skip the k highest-importance blocks at every step.
SkippingStrategy top_importance_strategy(const ScoreMatrix& importance, std::size_t k,
                                         const Grid<double>& jitter);

/// Recommended strategies first (flagged when they equal a baseline), then
/// the baselines not already listed.
std::vector<SkippingStrategy> merge_with_baselines(std::vector<SkippingStrategy> recommended,
                                                   const std::vector<SkippingStrategy>& baselines);

/// Per-step combination weights; skipped blocks carry 0. Entries are unbounded.
using StudentWeights = Grid<double>;

/// Unit weights on kept blocks, 0 on skipped ones.
StudentWeights unit_student(const SkippingStrategy& strategy, std::size_t steps,
                            std::size_t blocks);

/// Least-squares fit of kept-block weights to the unit-weight teacher over
/// `trials` samples per step, drawn from the sample stream of `seed`.
StudentWeights refit_student(const SurrogateModel& model, const SkippingStrategy& strategy,
                             std::size_t trials, std::uint64_t seed);

/// Mean squared teacher/student difference over `trials` samples per step
/// from the sample stream of `seed`, averaged over steps and components.
double student_mse(const SurrogateModel& model, const SkippingStrategy& strategy,
                   const StudentWeights& weights, std::size_t trials, std::uint64_t seed);

/// Seed of the step-t sample stream; refit and scoring share it.
std::uint64_t student_sample_seed(std::uint64_t seed, std::size_t step) noexcept;

struct StrategyScore {
  double train_mse = 0.0;
  double test_mse = 0.0;

  bool operator==(const StrategyScore&) const = default;
};

struct PruningConfig {
  std::size_t k = 1;
  std::size_t trials = 256;
  std::size_t eval_trials = 256;
  std::uint64_t train_seed = 0;
  std::uint64_t test_seed = 21;

  void validate() const;

  bool operator==(const PruningConfig&) const = default;
};

StrategyScore score_strategy(const SurrogateModel& model, const SkippingStrategy& strategy,
                             const StudentWeights& weights, std::size_t eval_trials,
                             std::uint64_t train_seed, std::uint64_t test_seed);

struct ScoredStrategy {
  SkippingStrategy strategy;
  StudentWeights weights;
  StrategyScore score;

  bool operator==(const ScoredStrategy&) const = default;
};

/// Refit on the train stream, then score on train and test streams.
ScoredStrategy evaluate_strategy(const SurrogateModel& model, const SkippingStrategy& strategy,
                                 const PruningConfig& config);

/// Serial reference over a strategy list.
std::vector<ScoredStrategy> evaluate_strategies(const SurrogateModel& model,
                                                std::span<const SkippingStrategy> strategies,
                                                const PruningConfig& config);

}  // namespace blockprobe
