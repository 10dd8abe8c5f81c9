#include <doctest.h>

#include <cmath>
#include <set>

#include "blockprobe/presets.hpp"
#include "blockprobe/pruning.hpp"
#include "oracles.hpp"

using namespace blockprobe;

namespace {

ScoreMatrix importance_from(const Grid<double>& values) {
  return ScoreMatrix{ScoreKind::importance, 1, values};
}

Grid<double> random_scores(Rng& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid<double> g(n, m);
  for (std::size_t t = 0; t < n; ++t) {
    for (double& v : g.row(t)) v = u(rng);
  }
  return g;
}

SurrogateModel one_step(std::vector<BlockSpec> row, std::size_t dim, Regime regime) {
  Grid<BlockSpec> specs(1, row.size());
  for (std::size_t i = 0; i < row.size(); ++i) specs(0, i) = row[i];
  return SurrogateModel(std::move(specs), dim, regime);
}

SkippingStrategy skip_one_step(std::vector<std::size_t> skip) {
  return {"t", {std::move(skip)}, StrategyOrigin::manual, false};
}

}  // namespace

TEST_CASE("origin names round trip") {
  for (auto o : {StrategyOrigin::recommended, StrategyOrigin::baseline_static,
                 StrategyOrigin::baseline_symmetric, StrategyOrigin::manual}) {
    CHECK(strategy_origin_from_string(to_string(o)) == o);
  }
  CHECK_THROWS_AS(strategy_origin_from_string("other"), Error);
}

TEST_CASE("validate_strategy") {
  CHECK_NOTHROW(validate_strategy(skip_one_step({0, 2}), 1, 3));
  CHECK_THROWS_AS(validate_strategy(skip_one_step({3}), 1, 3), Error);
  CHECK_THROWS_AS(validate_strategy(skip_one_step({0, 1, 2, 3}), 1, 5), Error);
  CHECK_THROWS_AS(validate_strategy(skip_one_step({0}), 2, 3), Error);
}

TEST_CASE("raw count matches C(3,k)^n and strategies match the product oracle") {
  Rng rng(11);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t k = 1; k <= 2; ++k) {
      const std::size_t m = 3 + rng() % 5;
      const auto values = random_scores(rng, n, m);
      const Grid<double> zero(n, m, 0.0);
      const auto design = design_strategies(importance_from(values), k, zero);
      std::size_t expected = 1;
      for (std::size_t t = 0; t < n; ++t) expected *= oracle::binomial(3, k);
      CHECK(design.raw_count == expected);

      // Oracle pools: the three smallest values per step by direct comparison.
      std::vector<std::vector<std::size_t>> pools(n);
      for (std::size_t t = 0; t < n; ++t) {
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return values(t, a) < values(t, b); });
        pools[t].assign(idx.begin(), idx.begin() + 3);
      }
      const auto truth = oracle::strategy_product(pools, k);
      std::set<std::vector<std::vector<std::size_t>>> got;
      for (const auto& s : design.strategies) {
        CHECK(s.origin == StrategyOrigin::recommended);
        CHECK(got.insert(s.per_step).second);
      }
      CHECK(got == truth);
    }
  }
}

TEST_CASE("design rejects bad k and tiny models") {
  const Grid<double> v(1, 4, 0.5), z(1, 4, 0.0);
  CHECK_THROWS_AS(design_strategies(importance_from(v), 3, z), ConfigError);
  CHECK_THROWS_AS(design_strategies(importance_from(v), 0, z), ConfigError);
  const Grid<double> small(1, 2, 0.5), zs(1, 2, 0.0);
  CHECK_THROWS_WITH_AS(design_strategies(importance_from(small), 1, zs),
                       "need at least three blocks", Error);
}

TEST_CASE("recommended strategies never skip a block outside the bottom three") {
  Rng rng(5);
  const auto values = random_scores(rng, 3, 7);
  const auto is = importance_from(values);
  const Grid<double> zero(3, 7, 0.0);
  const auto low = lowest_blocks(is, 3, zero);
  for (std::size_t k = 1; k <= 2; ++k) {
    for (const auto& s : design_strategies(is, k, zero).strategies) {
      for (std::size_t t = 0; t < 3; ++t) {
        CHECK(s.per_step[t].size() == k);
        for (std::size_t b : s.per_step[t]) {
          CHECK(std::find(low[t].begin(), low[t].end(), b) != low[t].end());
        }
      }
    }
  }
}

TEST_CASE("baselines") {
  const auto b1 = baseline_strategies(2, 5, 1);
  CHECK(b1.size() == 5);
  for (const auto& s : b1) CHECK(s.per_step[0] == s.per_step[1]);
  const auto b2 = baseline_strategies(2, 5, 2);
  std::size_t symmetric = 0;
  for (const auto& s : b2) {
    if (s.origin == StrategyOrigin::baseline_symmetric) {
      ++symmetric;
      CHECK(s.per_step[0][0] + s.per_step[0][1] == 4);
    }
  }
  CHECK(symmetric == 2);
  CHECK(b2.size() == oracle::binomial(5, 2));
}

TEST_CASE("top-importance strategy skips the highest scorers") {
  Grid<double> v(1, 4);
  v(0, 0) = 0.2;
  v(0, 1) = 0.9;
  v(0, 2) = 0.5;
  v(0, 3) = 0.7;
  const auto s = top_importance_strategy(importance_from(v), 2, Grid<double>(1, 4, 0.0));
  CHECK(s.per_step[0] == std::vector<std::size_t>{1, 3});
}

TEST_CASE("merge flags overlaps and drops duplicate baselines") {
  const auto baselines = baseline_strategies(1, 4, 1);
  std::vector<SkippingStrategy> rec{{"rec:0", {{0}}, StrategyOrigin::recommended, false}};
  const auto merged = merge_with_baselines(rec, baselines);
  CHECK(merged.size() == baselines.size());
  CHECK(merged[0].overlaps_baseline);
  CHECK(merged[0].origin == StrategyOrigin::recommended);
  for (std::size_t i = 1; i < merged.size(); ++i) CHECK(merged[i].per_step[0] != rec[0].per_step[0]);
}

TEST_CASE("refit without skipping recovers unit weights") {
  Rng rng(3);
  const auto model = random_independent_model(rng, 2, 5, 4);
  const SkippingStrategy none{"none", {{}, {}}, StrategyOrigin::manual, false};
  const auto w = refit_student(model, none, 64, 1);
  for (double v : w.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(student_mse(model, none, w, 64, 2) < 1e-20);
}

TEST_CASE("refit matches the normal-equation oracle") {
  Rng rng(9);
  const auto model = random_independent_model(rng, 1, 4, 3);
  const auto strategy = skip_one_step({1});
  const std::size_t trials = 40;
  const auto w = refit_student(model, strategy, trials, 17);

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  Rng samples(student_sample_seed(17, 0));
  for (std::size_t k = 0; k < trials; ++k) {
    const auto s = sample_step(model, 0, samples);
    for (std::size_t c = 0; c < model.dim(); ++c) {
      std::vector<double> row;
      double target = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const auto& b = s.blocks[i];
        const double yi = model.spec(0, i).a_coeff * (b.f[c] + b.g[c] + b.n[c]);
        target += yi;
        if (i != 1) row.push_back(yi);
      }
      x.push_back(row);
      y.push_back(target);
    }
  }
  const auto expected = oracle::solve_normal_equations(x, y);
  CHECK(w(0, 0) == doctest::Approx(expected[0]).epsilon(1e-9));
  CHECK(w(0, 1) == 0.0);
  CHECK(w(0, 2) == doctest::Approx(expected[1]).epsilon(1e-9));
  CHECK(w(0, 3) == doctest::Approx(expected[2]).epsilon(1e-9));
}

TEST_CASE("a skipped shared-noise twin doubles its partner") {
  const auto model =
      one_step({{0.5, 0.0, 1.0, 0.0}, {0.5, 0.0, 1.0, 0.0}}, 4, Regime::shared_noise);
  const auto w = refit_student(model, skip_one_step({1}), 16, 0);
  CHECK(w(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w(0, 1) == 0.0);
}

TEST_CASE("a kept zero-coefficient block makes the refit degenerate") {
  const auto model =
      one_step({{0.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0}, {0.5, 0.0, 1.0, 0.2}}, 4,
               Regime::independent);
  CHECK_THROWS_WITH_AS(refit_student(model, skip_one_step({2}), 32, 0), "degenerate refit",
                       Error);
  CHECK_NOTHROW(refit_student(model, skip_one_step({0}), 32, 0));
  CHECK_THROWS_AS(refit_student(model, skip_one_step({}), 2, 0), ConfigError);
}

TEST_CASE("refit never does worse than unit weights on its training stream") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = random_independent_model(rng, 2, 6, 4);
    const SkippingStrategy s{"s", {{rng() % 6}, {rng() % 6, 5 - rng() % 3}},
                             StrategyOrigin::manual, false};
    auto normalized = s;
    for (auto& set : normalized.per_step) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    const auto refit = refit_student(model, normalized, 128, 4);
    const auto unit = unit_student(normalized, 2, 6);
    CHECK(student_mse(model, normalized, refit, 128, 4) <=
          student_mse(model, normalized, unit, 128, 4) + 1e-12);
  }
}

TEST_CASE("evaluation is deterministic and uses distinct streams") {
  const auto model = make_preset("planted-2x7");
  const SkippingStrategy s{"s", {{0}, {1}}, StrategyOrigin::manual, false};
  PruningConfig config;
  config.trials = 32;
  config.eval_trials = 32;
  const auto a = evaluate_strategy(model, s, config);
  const auto b = evaluate_strategy(model, s, config);
  CHECK(a == b);
  CHECK(a.score.train_mse != a.score.test_mse);
  config.test_seed = config.train_seed;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("skipping planted inert blocks costs far less than skipping the dominant ones") {
  const auto model = make_preset("planted-2x7");
  const auto truth = *planted_truth("planted-2x7");
  PruningConfig config;
  config.trials = 64;
  config.eval_trials = 64;
  const SkippingStrategy inert{"i", {{truth.least_important[0]}, {truth.least_important[1]}},
                               StrategyOrigin::manual, false};
  const SkippingStrategy top{"d", {{truth.most_important[0]}, {truth.most_important[1]}},
                             StrategyOrigin::manual, false};
  CHECK(evaluate_strategy(model, inert, config).score.test_mse * 10 <
        evaluate_strategy(model, top, config).score.test_mse);
}
