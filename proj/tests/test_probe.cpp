#include <doctest.h>

#include <algorithm>

#include "blockprobe/presets.hpp"
#include "blockprobe/probe.hpp"

using namespace blockprobe;

TEST_CASE("tolerance and bias schedules") {
  const ProbeConfig c;
  CHECK(tolerance_at(c, 0.0) == 1e-4);
  CHECK(tolerance_at(c, 1.0) == 2e-4);
  CHECK(tolerance_at(c, 0.5) == doctest::Approx(1.5e-4));
  CHECK(bias_magnitude_at(c, 0.0) == 0.02);
  CHECK(bias_magnitude_at(c, 1.0) == 0.05);
  CHECK(bias_magnitude_at(c, 0.25) == doctest::Approx(0.0275));
  CHECK(step_progress(0, 1) == 0.0);
  CHECK(step_progress(2, 5) == 0.5);
}

TEST_CASE("config validation") {
  ProbeConfig c;
  CHECK_NOTHROW(c.validate());
  c.tol_end = 0.5e-4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.bias_start = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.epsilon_margin = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.update_probs.accepted.end = {0.2, 0.2, 0.6};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.update_probs.rejected.start = {0.5, 0.3, 0.1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.update_probs = ThresholdUpdateProbabilities::identity();
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("probability schedules interpolate linearly") {
  const ThresholdUpdateProbabilities p;
  const auto mid = p.accepted.at(0.5);
  CHECK(mid.too_high == doctest::Approx(0.1));
  CHECK(mid.moderate == doctest::Approx(0.45));
  CHECK(mid.too_low == doctest::Approx(0.45));
  CHECK(p.rejected.at(1.0) == p.rejected.end);
}

TEST_CASE("generate_candidates respects bounds and energy") {
  Rng rng(5);
  const std::vector<double> best{0.99, 0.5, 1.0, 0.0, 0.7};
  const double budget = energy(best);
  std::size_t total = 0;
  for (int k = 0; k < 1000; ++k) {
    for (const auto& c : generate_candidates(best, 0.05, 8, rng)) {
      ++total;
      REQUIRE(energy(c) <= budget);
      for (double w : c) REQUIRE((w >= 0.0 && w <= 1.0));
    }
  }
  CHECK(total > 0);

  const std::vector<double> zeros(4, 0.0);
  for (const auto& c : generate_candidates(zeros, 0.05, 8, rng)) CHECK(c == zeros);

  for (const auto& c : generate_candidates(best, 1e-300, 4, rng)) {
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(best[i]));
  }
  CHECK_THROWS_AS(generate_candidates(best, 0.0, 4, rng), Error);
}

TEST_CASE("evaluate_candidate") {
  const auto model = make_preset("planted-2x7");
  Rng rng(2);
  const std::vector<double> teacher(7, 0.995);
  const std::vector<double> zeros(7, 0.0);
  const auto same = evaluate_candidate(model, 0, teacher, teacher, zeros, 1e-4, rng);
  CHECK(same.accepted);
  CHECK(same.error == 0.0);

  auto far = teacher;
  far[3] = 0.0;
  CHECK(evaluate_candidate(model, 0, far, teacher, zeros, 1e300, rng).accepted);
  CHECK_FALSE(evaluate_candidate(model, 0, far, teacher, zeros, 1e-4, rng).accepted);

  // Skip only the near-zero coefficient block.
  const auto truth = *planted_truth("planted-2x7");
  std::vector<double> thresholds(7, 0.0);
  thresholds[truth.least_important[0]] = 1.0;
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    accepted += evaluate_candidate(model, 0, teacher, teacher, thresholds, 1e-4, r).accepted;
  }
  CHECK(accepted >= 95);
}

TEST_CASE("threshold update algebra") {
  const std::vector<double> q{0.4, 0.8, 0.0};
  const std::vector<double> w{0.9, 0.3, 0.0};
  CHECK(update_thresholds_accepted(q, w, {0, 1, 0}, 1e-6) == q);
  const auto low = update_thresholds_accepted(q, w, {0, 0, 1}, 1e-6);
  CHECK(low[0] == 0.9 - 1e-6);
  CHECK(low[2] == 0.0);  // clamped
  const auto half = update_thresholds_rejected(q, w, {1, 0, 0}, 1e-6);
  CHECK(half[1] == 0.4);
  CHECK(update_thresholds_accepted(std::vector<double>{0.4}, std::vector<double>{0.9},
                                   {0.1, 0.5, 0.4}, 1e-6)[0] ==
        doctest::Approx(0.1 * 0.2 + 0.5 * 0.4 + 0.4 * (0.9 - 1e-6)).epsilon(1e-15));
  CHECK(update_thresholds_rejected(std::vector<double>{0.8}, std::vector<double>{0.3},
                                   {0.6, 0.3, 0.1}, 1e-6)[0] ==
        doctest::Approx(0.5099999).epsilon(1e-12));
}

TEST_CASE("threshold updates stay within the convex hull of their inputs") {
  Rng rng(44);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double q = u(rng), w = u(rng);
    double a = u(rng), b = u(rng), c = u(rng);
    const double s = a + b + c;
    const ProbabilityTriple p{a / s, b / s, c / s};
    const double out = update_thresholds(std::vector<double>{q}, std::vector<double>{w}, p, 1e-6)[0];
    const double lo = std::max(0.0, std::min({q / 2, q, w - 1e-6}));
    const double hi = std::min(1.0, std::max({q / 2, q, w - 1e-6}));
    REQUIRE(out >= lo - 1e-15);
    REQUIRE(out <= hi + 1e-15);
  }
}

TEST_CASE("run_probe invariants") {
  const auto model = make_preset("planted-2x7");
  ProbeConfig config;
  config.perturbations_per_run = 12;
  Rng init(1);
  const WeightMatrix teacher = init_teacher_weights(2, 7, init);
  for (double w : teacher.grid().data()) CHECK((w >= 0.99 && w <= 1.0));

  std::vector<double> last_energy{energy(teacher.row(0)), energy(teacher.row(1))};
  const auto result = run_probe(model, teacher, config, 77, [&](const ProbeState& s) {
    for (std::size_t t = 0; t < 2; ++t) {
      const double e = energy(s.best_weights.row(t));
      REQUIRE(e <= last_energy[t]);
      REQUIRE(e <= s.initial_energy[t]);
      last_energy[t] = e;
    }
  });
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(result.accepted_count[t] + result.rejected_count[t] == 12);
    // Ranking lists thresholds in non-decreasing order.
    for (std::size_t pos = 1; pos < 7; ++pos) {
      CHECK(result.thresholds(t, result.ranking[t][pos - 1]) <=
            result.thresholds(t, result.ranking[t][pos]) + 1e-9);
    }
  }
  CHECK(result == run_probe(model, teacher, config, 77));
  CHECK_FALSE(result == run_probe(model, teacher, config, 78));
}

TEST_CASE("run_probe with identity probabilities leaves thresholds at zero") {
  const auto model = make_preset("planted-2x7");
  ProbeConfig config;
  config.update_probs = ThresholdUpdateProbabilities::identity();
  const auto r = run_probe_seeded(model, config, 3);
  for (double q : r.thresholds.grid().data()) CHECK(q == 0.0);
}

TEST_CASE("run_probe with no perturbations returns zero thresholds") {
  const auto model = make_preset("planted-2x7");
  ProbeConfig config;
  config.perturbations_per_run = 0;
  const auto r = run_probe_seeded(model, config, 9);
  for (double q : r.thresholds.grid().data()) CHECK(q == 0.0);
  CHECK(r.ranking.steps() == 2);
  CHECK(r.ranking.blocks() == 7);
}

TEST_CASE("run_probe on a noiseless model accepts everything and thresholds rise") {
  const auto model = make_preset("zero-variance");
  ProbeConfig config;
  Rng init(4);
  const WeightMatrix teacher = init_teacher_weights(2, 7, init);
  std::vector<double> previous_min(2, 0.0);
  std::size_t iteration = 0;
  const auto r = run_probe(model, teacher, config, 5, [&](const ProbeState& s) {
    ++iteration;
    for (std::size_t t = 0; t < 2; ++t) {
      const auto q = s.thresholds.row(t);
      for (std::size_t i = 0; i < q.size(); ++i) REQUIRE((q[i] >= 0.0 && q[i] <= 1.0));
      const double lowest = *std::min_element(q.begin(), q.end());
      if (iteration <= 3) REQUIRE(lowest > previous_min[t]);  // early rise from zero
      previous_min[t] = lowest;
    }
  });
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(r.accepted_count[t] == config.perturbations_per_run);
    CHECK(r.rejected_count[t] == 0);
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(r.thresholds(t, i) > 0.5 * r.best_weights(t, i));
    }
  }
}

TEST_CASE("planted inert block tends to the lowest threshold in single runs") {
  const auto model = make_preset("planted-2x7");
  const auto truth = *planted_truth("planted-2x7");
  ProbeConfig config;
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = run_probe_seeded(model, config, probe_run_seed(1000, s));
    hits += r.ranking[0][0] == truth.least_important[0] ? 1 : 0;
  }
  CHECK(hits >= 10);
}

TEST_CASE("run seeds are stable under adding runs") {
  CHECK(probe_run_seed(5, 0) != probe_run_seed(5, 1));
  ProbeConfig a;
  a.runs = 3;
  a.perturbations_per_run = 3;
  ProbeConfig b = a;
  b.runs = 5;
  const auto model = make_preset("planted-2x5");
  const auto ra = run_probes(model, a);
  const auto rb = run_probes(model, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ra[i] == rb[i]);
}
