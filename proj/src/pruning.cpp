#include "blockprobe/pruning.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace blockprobe {

const char* to_string(StrategyOrigin origin) noexcept {
  switch (origin) {
    case StrategyOrigin::recommended: return "recommended";
    case StrategyOrigin::baseline_static: return "baseline-static";
    case StrategyOrigin::baseline_symmetric: return "baseline-symmetric";
    case StrategyOrigin::manual: return "manual";
  }
  return "unknown";
}

StrategyOrigin strategy_origin_from_string(const std::string& text) {
  for (auto o : {StrategyOrigin::recommended, StrategyOrigin::baseline_static,
                 StrategyOrigin::baseline_symmetric, StrategyOrigin::manual}) {
    if (text == to_string(o)) return o;
  }
  throw Error("unknown strategy origin: " + text);
}

void validate_strategy(const SkippingStrategy& strategy, std::size_t steps,
                       std::size_t blocks) {
  if (strategy.per_step.size() != steps) throw Error("strategy step count differs from model");
  for (const auto& set : strategy.per_step) {
    if (set.size() > kCandidatePool) throw Error("strategy skips more than three blocks");
    std::set<std::size_t> unique(set.begin(), set.end());
    if (unique.size() != set.size()) throw Error("strategy repeats a block index");
    for (std::size_t i : set) {
      if (i >= blocks) throw Error("strategy skip index out of range");
    }
  }
}

namespace {

std::string format_steps(const std::vector<std::vector<std::size_t>>& per_step) {
  std::string out;
  for (std::size_t t = 0; t < per_step.size(); ++t) {
    if (t > 0) out += '|';
    for (std::size_t j = 0; j < per_step[t].size(); ++j) {
      if (j > 0) out += ',';
      out += std::to_string(per_step[t][j]);
    }
  }
  return out;
}

std::vector<std::size_t> ascending_order(std::span<const double> scores,
                                         std::span<const double> jitter) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return scores[a] + jitter[a] < scores[b] + jitter[b];
  });
  return order;
}

void check_jitter(const ScoreMatrix& scores, const Grid<double>& jitter) {
  if (jitter.steps() != scores.values.steps() || jitter.blocks() != scores.values.blocks()) {
    throw Error("jitter table shape differs from score matrix");
  }
}

// All k-subsets of `pool`, each sorted, in lexicographic order of positions.
std::vector<std::vector<std::size_t>> subsets(const std::vector<std::size_t>& pool,
                                              std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (current.size() == k) {
      auto sorted = current;
      std::ranges::sort(sorted);
      out.push_back(std::move(sorted));
      return;
    }
    for (std::size_t i = start; i < pool.size(); ++i) {
      current.push_back(pool[i]);
      rec(i + 1);
      current.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> lowest_blocks(const ScoreMatrix& importance,
                                                    std::size_t count,
                                                    const Grid<double>& jitter) {
  check_jitter(importance, jitter);
  const Grid<double>& s = importance.values;
  if (count > s.blocks()) throw Error("requested more blocks than the model has");
  std::vector<std::vector<std::size_t>> out(s.steps());
  for (std::size_t t = 0; t < s.steps(); ++t) {
    auto order = ascending_order(s.row(t), jitter.row(t));
    out[t].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  }
  return out;
}

StrategyDesign design_strategies(const ScoreMatrix& importance, std::size_t k,
                                 const Grid<double>& jitter) {
  if (k != 1 && k != 2) throw ConfigError("k must be 1 or 2");
  if (importance.values.blocks() < kCandidatePool) throw Error("need at least three blocks");
  const std::size_t n = importance.values.steps();
  const auto pools = lowest_blocks(importance, kCandidatePool, jitter);

  std::vector<std::vector<std::vector<std::size_t>>> choices(n);
  for (std::size_t t = 0; t < n; ++t) choices[t] = subsets(pools[t], k);

  StrategyDesign design;
  std::set<std::vector<std::vector<std::size_t>>> seen;
  std::vector<std::vector<std::size_t>> path;
  std::function<void(std::size_t)> dfs = [&](std::size_t t) {
    if (t == n) {
      ++design.raw_count;
      if (seen.insert(path).second) {
        SkippingStrategy s;
        s.name = "rec:" + format_steps(path);
        s.per_step = path;
        s.origin = StrategyOrigin::recommended;
        design.strategies.push_back(std::move(s));
      }
      return;
    }
    for (const auto& choice : choices[t]) {
      path.push_back(choice);
      dfs(t + 1);
      path.pop_back();
    }
  };
  dfs(0);
  return design;
}

std::vector<SkippingStrategy> baseline_strategies(std::size_t steps, std::size_t blocks,
                                                  std::size_t k) {
  if (k != 1 && k != 2) throw ConfigError("k must be 1 or 2");
  std::vector<std::size_t> all(blocks);
  std::iota(all.begin(), all.end(), std::size_t{0});

  std::set<std::vector<std::size_t>> mirror;
  if (k == 2) {
    for (std::size_t i = 0; i < blocks / 2; ++i) mirror.insert({i, blocks - 1 - i});
  }

  std::vector<SkippingStrategy> out;
  for (const auto& subset : subsets(all, k)) {
    if (mirror.contains(subset)) continue;
    std::vector<std::vector<std::size_t>> per_step(steps, subset);
    out.push_back({"static:" + format_steps({subset}), std::move(per_step),
                   StrategyOrigin::baseline_static, false});
  }
  for (const auto& pair : mirror) {
    std::vector<std::vector<std::size_t>> per_step(steps, pair);
    out.push_back({"symmetric:" + format_steps({pair}), std::move(per_step),
                   StrategyOrigin::baseline_symmetric, false});
  }
  return out;
}

SkippingStrategy top_importance_strategy(const ScoreMatrix& importance, std::size_t k,
                                         const Grid<double>& jitter) {
  check_jitter(importance, jitter);
  const Grid<double>& s = importance.values;
  if (k == 0 || k > std::min(kCandidatePool, s.blocks())) {
    throw ConfigError("k out of range for top-importance strategy");
  }
  SkippingStrategy out;
  out.origin = StrategyOrigin::manual;
  out.per_step.resize(s.steps());
  for (std::size_t t = 0; t < s.steps(); ++t) {
    auto order = ascending_order(s.row(t), jitter.row(t));
    out.per_step[t].assign(order.end() - static_cast<std::ptrdiff_t>(k), order.end());
    std::ranges::sort(out.per_step[t]);
  }
  out.name = "top:" + format_steps(out.per_step);
  return out;
}

std::vector<SkippingStrategy> merge_with_baselines(std::vector<SkippingStrategy> recommended,
                                                   const std::vector<SkippingStrategy>& baselines) {
  std::set<std::vector<std::vector<std::size_t>>> listed;
  for (auto& s : recommended) {
    for (const auto& b : baselines) {
      if (b.per_step == s.per_step) s.overlaps_baseline = true;
    }
    listed.insert(s.per_step);
  }
  for (const auto& b : baselines) {
    if (listed.insert(b.per_step).second) recommended.push_back(b);
  }
  return recommended;
}

StudentWeights unit_student(const SkippingStrategy& strategy, std::size_t steps,
                            std::size_t blocks) {
  validate_strategy(strategy, steps, blocks);
  StudentWeights w(steps, blocks, 1.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i : strategy.per_step[t]) w(t, i) = 0.0;
  }
  return w;
}

std::uint64_t student_sample_seed(std::uint64_t seed, std::size_t step) noexcept {
  return derive_seed(seed, "student-samples", step);
}

namespace {

std::vector<std::size_t> kept_blocks(const std::vector<std::size_t>& skipped, std::size_t m) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::ranges::find(skipped, i) == skipped.end()) kept.push_back(i);
  }
  return kept;
}

}  // namespace

StudentWeights refit_student(const SurrogateModel& model, const SkippingStrategy& strategy,
                             std::size_t trials, std::uint64_t seed) {
  const std::size_t n = model.steps();
  const std::size_t m = model.blocks();
  const std::size_t d = model.dim();
  validate_strategy(strategy, n, m);
  if (trials < m) throw ConfigError("refit needs at least m trials");

  StudentWeights out(n, m, 0.0);
  StepSample sample;
  for (std::size_t t = 0; t < n; ++t) {
    const auto kept = kept_blocks(strategy.per_step[t], m);
    if (kept.empty()) continue;

    // One row per (trial, component); column j is A_j y_j for kept block j.
    Eigen::MatrixXd design(static_cast<Eigen::Index>(trials * d),
                           static_cast<Eigen::Index>(kept.size()));
    Eigen::VectorXd target(static_cast<Eigen::Index>(trials * d));
    Rng rng(student_sample_seed(seed, t));
    for (std::size_t k = 0; k < trials; ++k) {
      sample_step_into(model, t, rng, sample);
      for (std::size_t c = 0; c < d; ++c) {
        const auto row = static_cast<Eigen::Index>(k * d + c);
        double teacher = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const BlockSample& b = sample.blocks[i];
          teacher += model.spec(t, i).a_coeff * (b.f[c] + b.g[c] + b.n[c]);
        }
        target(row) = teacher;
        for (std::size_t j = 0; j < kept.size(); ++j) {
          const BlockSample& b = sample.blocks[kept[j]];
          design(row, static_cast<Eigen::Index>(j)) =
              model.spec(t, kept[j]).a_coeff * (b.f[c] + b.g[c] + b.n[c]);
        }
      }
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(kept.size())) throw Error("degenerate refit");
    const Eigen::VectorXd solution = qr.solve(target);
    for (std::size_t j = 0; j < kept.size(); ++j) {
      out(t, kept[j]) = solution(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

double student_mse(const SurrogateModel& model, const SkippingStrategy& strategy,
                   const StudentWeights& weights, std::size_t trials, std::uint64_t seed) {
  const std::size_t n = model.steps();
  const std::size_t m = model.blocks();
  validate_strategy(strategy, n, m);
  if (weights.steps() != n || weights.blocks() != m) {
    throw Error("student weights shape differs from model");
  }
  if (trials == 0) throw ConfigError("evaluation needs at least one trial");

  const std::vector<double> ones(m, 1.0);
  StepSample sample;
  std::vector<double> teacher;
  std::vector<double> student;
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    Rng rng(student_sample_seed(seed, t));
    for (std::size_t k = 0; k < trials; ++k) {
      sample_step_into(model, t, rng, sample);
      predict_noise_into(model, t, sample, ones, {}, teacher);
      predict_noise_into(model, t, sample, weights.row(t), strategy.per_step[t], student);
      for (std::size_t c = 0; c < teacher.size(); ++c) {
        total += (teacher[c] - student[c]) * (teacher[c] - student[c]);
      }
    }
  }
  return total / static_cast<double>(n * trials * model.dim());
}

void PruningConfig::validate() const {
  if (k != 1 && k != 2) throw ConfigError("pruning.k must be 1 or 2");
  if (trials == 0) throw ConfigError("pruning.trials must be positive");
  if (eval_trials == 0) throw ConfigError("pruning.eval_trials must be positive");
  if (train_seed == test_seed) throw ConfigError("pruning train and test seeds must differ");
}

StrategyScore score_strategy(const SurrogateModel& model, const SkippingStrategy& strategy,
                             const StudentWeights& weights, std::size_t eval_trials,
                             std::uint64_t train_seed, std::uint64_t test_seed) {
  return {student_mse(model, strategy, weights, eval_trials, train_seed),
          student_mse(model, strategy, weights, eval_trials, test_seed)};
}

ScoredStrategy evaluate_strategy(const SurrogateModel& model, const SkippingStrategy& strategy,
                                 const PruningConfig& config) {
  ScoredStrategy out{strategy, refit_student(model, strategy, config.trials, config.train_seed),
                     {}};
  out.score = score_strategy(model, strategy, out.weights, config.eval_trials,
                             config.train_seed, config.test_seed);
  return out;
}

std::vector<ScoredStrategy> evaluate_strategies(const SurrogateModel& model,
                                                std::span<const SkippingStrategy> strategies,
                                                const PruningConfig& config) {
  config.validate();
  std::vector<ScoredStrategy> out;
  out.reserve(strategies.size());
  for (const auto& s : strategies) out.push_back(evaluate_strategy(model, s, config));
  return out;
}

}  // namespace blockprobe
