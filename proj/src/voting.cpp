#include "blockprobe/voting.hpp"

#include <algorithm>
#include <numeric>

namespace blockprobe {

ScoreMatrix vote(std::span<const RankingSequence> rankings) {
  if (rankings.empty()) throw Error("no probe runs to vote on");
  const std::size_t n = rankings.front().steps();
  const std::size_t m = rankings.front().blocks();
  ScoreMatrix out{ScoreKind::voting, rankings.size(), Grid<double>(n, m, 0.0)};
  for (const auto& seq : rankings) {
    if (seq.steps() != n || seq.blocks() != m) throw Error("probe run shapes differ");
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t pos = 0; pos < m; ++pos) {
        out.values(t, seq[t][pos]) += static_cast<double>(pos + 1);
      }
    }
  }
  return out;
}

std::vector<RankingSequence> rankings_of(std::span<const ProbeRunResult> results) {
  std::vector<RankingSequence> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.ranking);
  return out;
}

ScoreMatrix vote(std::span<const ProbeRunResult> results) {
  const auto rankings = rankings_of(results);
  return vote(std::span<const RankingSequence>(rankings));
}

namespace {

ScoreMatrix scale_votes(const ScoreMatrix& voting, std::size_t runs, ScoreKind kind) {
  if (voting.kind != ScoreKind::voting) throw Error("expected a voting score matrix");
  if (runs == 0) throw Error("runs must be at least 1");
  const Grid<double>& vs = voting.values;
  const double total = static_cast<double>(vs.blocks() * runs);
  ScoreMatrix out{kind, runs, Grid<double>(vs.steps(), vs.blocks())};
  for (std::size_t t = 0; t < vs.steps(); ++t) {
    for (std::size_t i = 0; i < vs.blocks(); ++i) {
      const double importance = vs(t, i) / total;
      // Derive the complement from the rounded quotient so the pair sums to 1.
      out.values(t, i) = kind == ScoreKind::importance ? importance : 1.0 - importance;
    }
  }
  return out;
}

}  // namespace

ScoreMatrix importance_scores(const ScoreMatrix& voting, std::size_t runs) {
  return scale_votes(voting, runs, ScoreKind::importance);
}

ScoreMatrix inverted_importance_scores(const ScoreMatrix& voting, std::size_t runs) {
  return scale_votes(voting, runs, ScoreKind::inverted_importance);
}

Grid<double> draw_jitter_table(std::size_t steps, std::size_t blocks, double jitter_scale,
                               Rng& rng) {
  if (!(jitter_scale >= 0.0)) throw Error("jitter scale must be non-negative");
  Grid<double> out(steps, blocks, 0.0);
  if (jitter_scale == 0.0) return out;
  std::uniform_real_distribution<double> jitter(0.0, jitter_scale);
  for (std::size_t t = 0; t < steps; ++t) {
    for (double& v : out.row(t)) v = jitter(rng);
  }
  return out;
}

RankingSequence aggregate_ranking(const ScoreMatrix& scores, const Grid<double>& jitter) {
  const Grid<double>& s = scores.values;
  if (jitter.steps() != s.steps() || jitter.blocks() != s.blocks()) {
    throw Error("jitter table shape differs from score matrix");
  }
  std::vector<Permutation> per_step;
  per_step.reserve(s.steps());
  std::vector<double> keyed(s.blocks());
  for (std::size_t t = 0; t < s.steps(); ++t) {
    for (std::size_t i = 0; i < s.blocks(); ++i) keyed[i] = s(t, i) + jitter(t, i);
    std::vector<std::size_t> order(s.blocks());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order,
                             [&](std::size_t a, std::size_t b) { return keyed[a] < keyed[b]; });
    per_step.emplace_back(std::move(order));
  }
  return RankingSequence(std::move(per_step));
}

std::vector<std::vector<std::size_t>> traversal_orders(std::size_t runs, std::size_t samples,
                                                       Rng& rng) {
  std::vector<std::vector<std::size_t>> out(samples + 1, std::vector<std::size_t>(runs));
  std::iota(out[0].begin(), out[0].end(), std::size_t{0});
  for (std::size_t s = 1; s <= samples; ++s) {
    out[s] = out[0];
    std::shuffle(out[s].begin(), out[s].end(), rng);
  }
  return out;
}

std::size_t prefix_distance(std::span<const RankingSequence> rankings,
                            std::span<const std::size_t> order, const Grid<double>& jitter) {
  const std::size_t r = rankings.size();
  if (r < kStabilityPrefixes) throw Error("insufficient runs");
  if (order.size() != r) throw Error("traversal order length differs from run count");

  std::vector<RankingSequence> permuted;
  permuted.reserve(r);
  for (std::size_t idx : order) permuted.push_back(rankings[idx]);

  // Running vote totals; each prefix adds one run.
  ScoreMatrix running = vote(std::span<const RankingSequence>(permuted.data(), 1));
  std::vector<RankingSequence> tails;
  for (std::size_t k = 1; k <= r; ++k) {
    if (k > 1) {
      const ScoreMatrix one = vote(std::span<const RankingSequence>(&permuted[k - 1], 1));
      for (std::size_t t = 0; t < one.values.steps(); ++t) {
        for (std::size_t i = 0; i < one.values.blocks(); ++i) {
          running.values(t, i) += one.values(t, i);
        }
      }
      running.runs = k;
    }
    if (k + kStabilityPrefixes > r) tails.push_back(aggregate_ranking(running, jitter));
  }

  std::size_t worst = 0;
  for (std::size_t a = 0; a < tails.size(); ++a) {
    for (std::size_t b = a + 1; b < tails.size(); ++b) {
      worst = std::max(worst, ranking_sequence_distance(tails[a], tails[b]));
    }
  }
  return worst;
}

StabilityReport stability_check(std::span<const RankingSequence> rankings,
                                std::size_t traversal_samples, Rng& rng,
                                double jitter_scale) {
  if (rankings.size() < kStabilityPrefixes) throw Error("insufficient runs");
  const std::size_t n = rankings.front().steps();
  const std::size_t m = rankings.front().blocks();
  const Grid<double> jitter = draw_jitter_table(n, m, jitter_scale, rng);

  StabilityReport report;
  report.bound = static_cast<double>(n) / 2.0;
  report.orders = traversal_orders(rankings.size(), traversal_samples, rng);
  for (const auto& order : report.orders) {
    report.max_prefix_distance =
        std::max(report.max_prefix_distance, prefix_distance(rankings, order, jitter));
  }
  report.stable = 2 * report.max_prefix_distance <= n;
  return report;
}

StabilityReport stability_check(std::span<const ProbeRunResult> results,
                                std::size_t traversal_samples, Rng& rng,
                                double jitter_scale) {
  const auto rankings = rankings_of(results);
  return stability_check(std::span<const RankingSequence>(rankings), traversal_samples, rng,
                         jitter_scale);
}

}  // namespace blockprobe
