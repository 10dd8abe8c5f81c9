#include "blockprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blockprobe {

namespace {

double lerp(double a, double b, double fraction) noexcept {
  return a + fraction * (b - a);
}

void check_triple(const ProbabilityTriple& p, const char* label) {
  for (double v : {p.too_high, p.moderate, p.too_low}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(label) + ": probabilities must lie in [0, 1]");
    }
  }
  if (std::abs(p.too_high + p.moderate + p.too_low - 1.0) > 1e-9) {
    throw ConfigError(std::string(label) + ": probabilities must sum to 1");
  }
}

}  // namespace

ProbabilityTriple ProbabilitySchedule::at(double fraction) const noexcept {
  return {lerp(start.too_high, end.too_high, fraction),
          lerp(start.moderate, end.moderate, fraction),
          lerp(start.too_low, end.too_low, fraction)};
}

ThresholdUpdateProbabilities ThresholdUpdateProbabilities::identity() {
  const ProbabilityTriple id{0.0, 1.0, 0.0};
  return {{id, id}, {id, id}};
}

void ProbeConfig::validate() const {
  if (runs == 0) throw ConfigError("probe.runs must be at least 1");
  if (candidates_per_perturbation == 0) {
    throw ConfigError("probe.candidates_per_perturbation must be at least 1");
  }
  if (!(tol_start > 0.0 && tol_end >= tol_start)) {
    throw ConfigError("probe tolerance must satisfy tol_end >= tol_start > 0");
  }
  if (!(bias_start > 0.0 && bias_end >= bias_start)) {
    throw ConfigError("probe bias must satisfy bias_end >= bias_start > 0");
  }
  if (!(epsilon_margin > 0.0)) throw ConfigError("probe.epsilon_margin must be positive");
  if (!(jitter_scale >= 0.0)) throw ConfigError("probe.jitter_scale must be non-negative");

  const auto& acc = update_probs.accepted;
  const auto& rej = update_probs.rejected;
  check_triple(acc.start, "accepted start");
  check_triple(acc.end, "accepted end");
  check_triple(rej.start, "rejected start");
  check_triple(rej.end, "rejected end");
  if (acc.end.moderate < acc.start.moderate || acc.end.too_low > acc.start.too_low) {
    throw ConfigError("accepted schedule: P(B2|A) must not decrease, P(B3|A) must not increase");
  }
  if (rej.end.too_high > rej.start.too_high || rej.end.moderate < rej.start.moderate) {
    throw ConfigError("rejected schedule: P(B1|~A) must not increase, P(B2|~A) must not decrease");
  }
}

double step_progress(std::size_t step, std::size_t steps) noexcept {
  if (steps <= 1) return 0.0;
  return static_cast<double>(step) / static_cast<double>(steps - 1);
}

double tolerance_at(const ProbeConfig& config, double progress) noexcept {
  return lerp(config.tol_start, config.tol_end, progress);
}

double bias_magnitude_at(const ProbeConfig& config, double progress) noexcept {
  return lerp(config.bias_start, config.bias_end, progress);
}

std::vector<std::vector<double>> generate_candidates(std::span<const double> best,
                                                     double magnitude, std::size_t count,
                                                     Rng& rng) {
  if (!(magnitude > 0.0)) throw Error("perturbation magnitude must be positive");
  const double budget = energy(best);
  std::uniform_real_distribution<double> bias(-magnitude, magnitude);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<double> candidate(best.size());
  for (std::size_t slot = 0; slot < count; ++slot) {
    for (std::size_t attempt = 0; attempt < kCandidateAttempts; ++attempt) {
      for (std::size_t i = 0; i < best.size(); ++i) {
        candidate[i] = std::clamp(best[i] + bias(rng), 0.0, 1.0);
      }
      if (energy(candidate) <= budget) {
        out.push_back(candidate);
        break;
      }
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> skip_set(std::span<const double> weights,
                                  std::span<const double> thresholds) {
  std::vector<std::size_t> skip;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < thresholds[i]) skip.push_back(i);
  }
  return skip;
}

double mean_squared_difference(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) total += (a[c] - b[c]) * (a[c] - b[c]);
  return a.empty() ? 0.0 : total / static_cast<double>(a.size());
}

}  // namespace

CandidateOutcome evaluate_candidate(const SurrogateModel& model, std::size_t step,
                                    const StepSample& sample,
                                    std::span<const double> candidate,
                                    std::span<const double> teacher,
                                    std::span<const double> thresholds, double tolerance) {
  if (candidate.size() != model.blocks() || teacher.size() != model.blocks() ||
      thresholds.size() != model.blocks()) {
    throw Error("candidate, teacher and threshold rows must have length m");
  }
  const auto student = predict_noise(model, step, sample, candidate,
                                     skip_set(candidate, thresholds));
  const auto reference = predict_noise(model, step, sample, teacher);
  CandidateOutcome out;
  out.error = mean_squared_difference(student, reference);
  out.accepted = out.error <= tolerance;
  return out;
}

CandidateOutcome evaluate_candidate(const SurrogateModel& model, std::size_t step,
                                    std::span<const double> candidate,
                                    std::span<const double> teacher,
                                    std::span<const double> thresholds, double tolerance,
                                    Rng& rng) {
  const StepSample sample = sample_step(model, step, rng);
  return evaluate_candidate(model, step, sample, candidate, teacher, thresholds, tolerance);
}

std::vector<double> update_thresholds(std::span<const double> thresholds,
                                      std::span<const double> weights,
                                      const ProbabilityTriple& probs, double epsilon_margin) {
  if (thresholds.size() != weights.size()) throw Error("threshold and weight rows differ");
  std::vector<double> out(thresholds.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double q = thresholds[i];
    const double mixed = probs.too_high * (q / 2.0) + probs.moderate * q +
                         probs.too_low * (weights[i] - epsilon_margin);
    out[i] = std::clamp(mixed, 0.0, 1.0);
  }
  return out;
}

WeightMatrix init_teacher_weights(std::size_t steps, std::size_t blocks, Rng& rng) {
  std::uniform_real_distribution<double> init(0.99, 1.0);
  Grid<double> values(steps, blocks);
  for (std::size_t t = 0; t < steps; ++t) {
    for (double& w : values.row(t)) w = init(rng);
  }
  return WeightMatrix(std::move(values));
}

ProbeRunResult run_probe(const SurrogateModel& model, const WeightMatrix& teacher,
                         const ProbeConfig& config, std::uint64_t run_seed,
                         const ProbeObserver& observer) {
  config.validate();
  const std::size_t n = model.steps();
  const std::size_t m = model.blocks();
  if (teacher.steps() != n || teacher.blocks() != m) {
    throw ConfigError("teacher weights do not match the model shape");
  }

  Rng rng(run_seed);
  ProbeState state{teacher, ThresholdMatrix(n, m, 0.0), std::vector<double>(n), 0};
  for (std::size_t t = 0; t < n; ++t) state.initial_energy[t] = energy(teacher.row(t));

  ProbeRunResult result;
  result.seed = run_seed;
  result.accepted_count.assign(n, 0);
  result.rejected_count.assign(n, 0);

  const std::size_t iterations = config.perturbations_per_run;
  StepSample sample;
  for (std::size_t it = 0; it < iterations; ++it) {
    const double clock =
        iterations > 1 ? static_cast<double>(it) / static_cast<double>(iterations - 1) : 0.0;
    const ProbabilityTriple on_accept = config.update_probs.accepted.at(clock);
    const ProbabilityTriple on_reject = config.update_probs.rejected.at(clock);

    for (std::size_t t = 0; t < n; ++t) {
      const double progress = step_progress(t, n);
      const auto best_row = state.best_weights.row(t);
      const auto q_row = state.thresholds.row(t);
      const auto candidates = generate_candidates(
          best_row, bias_magnitude_at(config, progress), config.candidates_per_perturbation,
          rng);

      // One shared draw per (iteration, step): all candidates see the same inputs.
      sample_step_into(model, t, rng, sample);
      const double tolerance = tolerance_at(config, progress);
      const std::vector<double>* chosen = nullptr;
      double chosen_fitness = 0.0;
      for (const auto& candidate : candidates) {
        const auto outcome =
            evaluate_candidate(model, t, sample, candidate, teacher.row(t), q_row, tolerance);
        if (!outcome.accepted || energy(candidate) <= 0.0) continue;
        const double f = fitness(candidate, q_row, state.initial_energy[t]);
        if (chosen == nullptr || f > chosen_fitness) {
          chosen = &candidate;
          chosen_fitness = f;
        }
      }

      // Weights first, then thresholds against the (possibly new) best row.
      std::vector<double> next_q;
      if (chosen != nullptr) {
        state.best_weights.set_row(t, *chosen);
        next_q = update_thresholds_accepted(q_row, state.best_weights.row(t), on_accept,
                                            config.epsilon_margin);
        ++result.accepted_count[t];
      } else {
        next_q = update_thresholds_rejected(q_row, state.best_weights.row(t), on_reject,
                                            config.epsilon_margin);
        ++result.rejected_count[t];
      }
      state.thresholds.set_row(t, next_q);
    }
    state.iteration = it + 1;
    if (observer) observer(state);
  }

  std::vector<Permutation> ranking;
  ranking.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    ranking.push_back(argsort_with_jitter(state.thresholds.row(t), config.jitter_scale, rng));
  }
  result.thresholds = state.thresholds;
  result.best_weights = state.best_weights;
  result.ranking = RankingSequence(std::move(ranking));
  return result;
}

std::uint64_t probe_run_seed(std::uint64_t master_seed, std::size_t index) noexcept {
  return derive_seed(master_seed, "probe-run", index);
}

ProbeRunResult run_probe_seeded(const SurrogateModel& model, const ProbeConfig& config,
                                std::uint64_t run_seed) {
  Rng init_rng(derive_seed(run_seed, "teacher-init"));
  const WeightMatrix teacher = init_teacher_weights(model.steps(), model.blocks(), init_rng);
  return run_probe(model, teacher, config, run_seed);
}

std::vector<ProbeRunResult> run_probes(const SurrogateModel& model,
                                       const ProbeConfig& config) {
  config.validate();
  std::vector<ProbeRunResult> out;
  out.reserve(config.runs);
  for (std::size_t r = 0; r < config.runs; ++r) {
    out.push_back(run_probe_seeded(model, config, probe_run_seed(config.seed, r)));
  }
  return out;
}

}  // namespace blockprobe
