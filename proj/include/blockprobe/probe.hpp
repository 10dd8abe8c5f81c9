#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "blockprobe/core.hpp"
#include "blockprobe/surrogate.hpp"

namespace blockprobe {

/// P(B1|.), P(B2|.), P(B3|.): threshold too high / moderate / too low.
struct ProbabilityTriple {
  double too_high = 0.0;
  double moderate = 1.0;
  double too_low = 0.0;

  bool operator==(const ProbabilityTriple&) const = default;
};

/// A triple interpolated linearly between `start` and `end`.
struct ProbabilitySchedule {
  ProbabilityTriple start;
  ProbabilityTriple end;

  ProbabilityTriple at(double fraction) const noexcept;

  bool operator==(const ProbabilitySchedule&) const = default;
};

struct ThresholdUpdateProbabilities {
  ProbabilitySchedule accepted{{0.1, 0.3, 0.6}, {0.1, 0.6, 0.3}};
  ProbabilitySchedule rejected{{0.6, 0.3, 0.1}, {0.3, 0.6, 0.1}};

  /// P(.|.) = 1 on the moderate event, for both outcomes.
  static ThresholdUpdateProbabilities identity();

  bool operator==(const ThresholdUpdateProbabilities&) const = default;
};

struct ProbeConfig {
  std::size_t runs = 15;
  std::size_t perturbations_per_run = 20;
  std::size_t candidates_per_perturbation = 8;
  double tol_start = 1e-4;
  double tol_end = 2e-4;
  double bias_start = 0.02;
  double bias_end = 0.05;
  double epsilon_margin = 1e-6;
  ThresholdUpdateProbabilities update_probs;
  double jitter_scale = kDefaultJitterScale;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  bool operator==(const ProbeConfig&) const = default;
};

/// Rejection-resampling budget per candidate slot in generate_candidates.
inline constexpr std::size_t kCandidateAttempts = 16;

/// Fraction of inference progress for step t of n (0 when n == 1).
double step_progress(std::size_t step, std::size_t steps) noexcept;

double tolerance_at(const ProbeConfig& config, double progress) noexcept;
double bias_magnitude_at(const ProbeConfig& config, double progress) noexcept;

/// clamp(best + U[-magnitude, magnitude], 0, 1), redrawn while its energy
/// exceeds energy(best). Slots that exhaust their attempts are dropped.
std::vector<std::vector<double>> generate_candidates(std::span<const double> best,
                                                     double magnitude, std::size_t count,
                                                     Rng& rng);

struct CandidateOutcome {
  bool accepted = false;
  double error = 0.0;
};

/// Student (candidate weights, blocks below threshold skipped) against
/// teacher (teacher weights, nothing skipped) on one shared sample.
CandidateOutcome evaluate_candidate(const SurrogateModel& model, std::size_t step,
                                    const StepSample& sample,
                                    std::span<const double> candidate,
                                    std::span<const double> teacher,
                                    std::span<const double> thresholds, double tolerance);

/// As above, drawing a fresh sample from `rng`.
CandidateOutcome evaluate_candidate(const SurrogateModel& model, std::size_t step,
                                    std::span<const double> candidate,
                                    std::span<const double> teacher,
                                    std::span<const double> thresholds, double tolerance,
                                    Rng& rng);

/// q' = P1 * q/2 + P2 * q + P3 * (w - eps), clamped to [0, 1].
std::vector<double> update_thresholds(std::span<const double> thresholds,
                                      std::span<const double> weights,
                                      const ProbabilityTriple& probs, double epsilon_margin);

inline std::vector<double> update_thresholds_accepted(std::span<const double> q,
                                                      std::span<const double> w,
                                                      const ProbabilityTriple& probs,
                                                      double epsilon_margin) {
  return update_thresholds(q, w, probs, epsilon_margin);
}

inline std::vector<double> update_thresholds_rejected(std::span<const double> q,
                                                      std::span<const double> w,
                                                      const ProbabilityTriple& probs,
                                                      double epsilon_margin) {
  return update_thresholds(q, w, probs, epsilon_margin);
}

/// Teacher weights drawn from U[0.99, 1.0].
WeightMatrix init_teacher_weights(std::size_t steps, std::size_t blocks, Rng& rng);

struct ProbeState {
  WeightMatrix best_weights;
  ThresholdMatrix thresholds;
  std::vector<double> initial_energy;
  std::size_t iteration = 0;
};

struct ProbeRunResult {
  ThresholdMatrix thresholds;
  WeightMatrix best_weights;
  /// Per step: block indices in non-decreasing threshold order.
  RankingSequence ranking;
  std::vector<std::size_t> accepted_count;
  std::vector<std::size_t> rejected_count;
  std::uint64_t seed = 0;

  bool operator==(const ProbeRunResult&) const = default;
};

/// Called after every completed perturbation iteration.
using ProbeObserver = std::function<void(const ProbeState&)>;

ProbeRunResult run_probe(const SurrogateModel& model, const WeightMatrix& teacher,
                         const ProbeConfig& config, std::uint64_t run_seed,
                         const ProbeObserver& observer = {});

/// Seed of run `index` under a probe master seed.
std::uint64_t probe_run_seed(std::uint64_t master_seed, std::size_t index) noexcept;

/// One run with its own teacher initialization drawn from the run seed.
ProbeRunResult run_probe_seeded(const SurrogateModel& model, const ProbeConfig& config,
                                std::uint64_t run_seed);

/// Serial reference: config.runs runs under config.seed, in order.
std::vector<ProbeRunResult> run_probes(const SurrogateModel& model,
                                       const ProbeConfig& config);

}  // namespace blockprobe
