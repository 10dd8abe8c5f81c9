#include "blockprobe/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "blockprobe/parallel.hpp"
#include "blockprobe/presets.hpp"
#include "blockprobe/pruning.hpp"
#include "blockprobe/schedules.hpp"
#include "blockprobe/voting.hpp"

namespace blockprobe {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string model_label(const ExperimentConfig& config) {
  return config.definition ? std::string("custom") : config.preset;
}

std::vector<ProbeRunResult> results_from(const json& probe) {
  std::vector<ProbeRunResult> out;
  for (const auto& r : probe.at("runs")) out.push_back(probe_result_from_json(r));
  return out;
}

ScoreMatrix importance_from(const json& voting, ScoreKind kind) {
  const char* key = kind == ScoreKind::importance ? "importance" : "inverted";
  return {kind, voting.at("runs").get<std::size_t>(), grid_from_json(voting.at(key), key)};
}

void check_shape(const Grid<double>& grid, const SurrogateModel& model, const char* what) {
  if (grid.steps() != model.steps() || grid.blocks() != model.blocks()) {
    throw Error(std::string(what) + " shape differs from the configured model");
  }
}

const json& require_stage(const json& artifact, const char* stage, const char* command) {
  const json& d = artifact.at("deterministic");
  if (!d.contains(stage)) {
    throw ConfigError(std::string("artifact has no '") + stage + "' stage; run '" + command +
                      "' first");
  }
  return d.at(stage);
}

// Reports any exception as a usage/config failure.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

void write_csv(const std::filesystem::path& dir, const char* name, const std::string& text) {
  write_text_file(dir / name, text);
}

void export_voting(const json& voting, const std::filesystem::path& dir) {
  write_csv(dir, "voting_scores.csv", grid_csv(grid_from_json(voting.at("voting"), "voting")));
  write_csv(dir, "importance_scores.csv",
            grid_csv(grid_from_json(voting.at("importance"), "importance")));
  write_csv(dir, "inverted_scores.csv",
            grid_csv(grid_from_json(voting.at("inverted"), "inverted")));
}

void export_schedule(const json& schedule, const std::filesystem::path& dir) {
  const Grid<double> w = grid_from_json(schedule.at("weights"), "schedule weights");
  std::ostringstream out;
  out << "# surrogate variance report; no perceptual metric is computed\n";
  out << "step";
  for (std::size_t i = 0; i < w.blocks(); ++i) out << ",block" << i;
  out << ",variance,vanilla_variance,ratio,inverted_ratio\n";
  const json& report = schedule.at("report");
  const json& inverted = schedule.at("inverted").at("report");
  for (std::size_t t = 0; t < w.steps(); ++t) {
    out << t;
    for (double v : w.row(t)) out << ',' << format_double(v);
    out << ',' << format_double(report[t].at("variance").get<double>()) << ','
        << format_double(report[t].at("vanilla_variance").get<double>()) << ','
        << format_double(report[t].at("ratio").get<double>()) << ','
        << format_double(inverted[t].at("ratio").get<double>()) << '\n';
  }
  write_csv(dir, "schedule.csv", out.str());
}

void export_pruning(const json& pruning, const std::filesystem::path& dir) {
  std::ostringstream out;
  out << "# teacher-student MSE on the surrogate\n";
  out << "name,origin,overlaps_baseline,train_mse,test_mse\n";
  for (const auto& s : pruning.at("strategies")) {
    out << s.at("name").get<std::string>() << ',' << s.at("origin").get<std::string>() << ','
        << (s.at("overlaps_baseline").get<bool>() ? "true" : "false") << ','
        << format_double(s.at("train_mse").get<double>()) << ','
        << format_double(s.at("test_mse").get<double>()) << '\n';
  }
  write_csv(dir, "strategies.csv", out.str());
}

std::string join_order(const json& order) {
  std::string out;
  for (const auto& v : order) {
    if (!out.empty()) out += ' ';
    out += std::to_string(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

std::vector<VerifyRow> verify_rows(const ExperimentConfig& config) {
  const SurrogateModel model = config.model();
  const std::size_t m = model.blocks();
  Rng weight_rng(stage_seed(config.seed, "verify-weights"));
  std::uniform_real_distribution<double> random_weight(0.5, 1.0);

  std::vector<VerifyRow> rows;
  for (std::size_t t = 0; t < model.steps(); ++t) {
    std::vector<std::pair<std::string, std::vector<double>>> sets{
        {"ones", std::vector<double>(m, 1.0)}, {"uniform-0.9", std::vector<double>(m, 0.9)}};
    std::vector<double> random(m);
    for (double& w : random) w = random_weight(weight_rng);
    sets.emplace_back("random", std::move(random));

    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& [label, weights] = sets[k];
      VerifyRow row;
      row.step = t;
      row.weights = label;
      const ErrorVariance analytic = analytic_error_variance(model, t, weights);
      row.analytic = analytic.exact;
      row.approximation = analytic.approximation;
      row.approximation_gap = analytic.approximation - analytic.exact;
      row.monte_carlo = monte_carlo_error_variance_parallel(
          model, t, weights, config.verify.draws,
          derive_seed(stage_seed(config.seed, "verify"), label, t), config.jobs);
      if (row.analytic > 0.0) {
        row.relative_error = std::abs(row.monte_carlo - row.analytic) / row.analytic;
      } else {
        row.relative_error =
            row.monte_carlo == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string verify_csv(const std::string& label, const std::vector<VerifyRow>& rows) {
  std::ostringstream out;
  out << "model,step,weights,analytic,monte_carlo,relative_error,approximation,"
         "approximation_gap\n";
  for (const auto& r : rows) {
    out << label << ',' << r.step << ',' << r.weights << ',' << format_double(r.analytic) << ','
        << format_double(r.monte_carlo) << ',' << format_double(r.relative_error) << ','
        << format_double(r.approximation) << ',' << format_double(r.approximation_gap) << '\n';
  }
  return out.str();
}

json probe_section(const ExperimentConfig& config) {
  const SurrogateModel model = config.model();
  const auto results = run_probes_parallel(model, config.seeded_probe(), config.jobs);
  json runs = json::array();
  for (const auto& r : results) runs.push_back(probe_result_to_json(r));
  return {{"runs", std::move(runs)}};
}

json voting_section(const ExperimentConfig& config, const json& probe) {
  const SurrogateModel model = config.model();
  const auto results = results_from(probe);
  const auto rankings = rankings_of(results);
  const ScoreMatrix votes = vote(std::span<const RankingSequence>(rankings));
  check_shape(votes.values, model, "probe results");
  const std::size_t r = results.size();
  const ScoreMatrix is = importance_scores(votes, r);
  const ScoreMatrix inv = inverted_importance_scores(votes, r);

  Rng aggregate_rng(stage_seed(config.seed, "aggregate"));
  const Grid<double> jitter = draw_jitter_table(model.steps(), model.blocks(),
                                                config.probe.jitter_scale, aggregate_rng);

  json out = {{"runs", r},
              {"voting", grid_to_json(votes.values)},
              {"importance", grid_to_json(is.values)},
              {"inverted", grid_to_json(inv.values)},
              {"ranking", ranking_to_json(aggregate_ranking(votes, jitter))}};
  if (r >= kStabilityPrefixes) {
    Rng rng(stage_seed(config.seed, "stability"));
    const StabilityReport s =
        stability_check_parallel(rankings, config.voting.traversal_samples, rng,
                                 config.probe.jitter_scale, config.jobs);
    out["stability"] = {{"stable", s.stable},
                        {"max_prefix_distance", s.max_prefix_distance},
                        {"bound", s.bound},
                        {"traversals", s.orders.size()}};
  } else {
    out["stability"] = nullptr;
  }
  return out;
}

json schedule_section(const ExperimentConfig& config, const json& voting) {
  const SurrogateModel model = config.model();
  const ScoreMatrix is = importance_from(voting, ScoreKind::importance);
  const ScoreMatrix inv = importance_from(voting, ScoreKind::inverted_importance);
  check_shape(is.values, model, "importance scores");
  const auto& opt = config.schedule;

  const ReweightingSchedule schedule = build_schedule(is, opt.low, opt.high);
  const ReweightingSchedule inverted = build_schedule(inv, opt.low, opt.high);
  json out = schedule_to_json(schedule, evaluate_schedule(model, schedule, opt.signal_power));
  out["recommended_range"] = is_recommended_range(opt.low, opt.high);
  json inv_json = schedule_to_json(inverted, evaluate_schedule(model, inverted, opt.signal_power));
  out["inverted"] = {{"weights", std::move(inv_json["weights"])},
                     {"report", std::move(inv_json["report"])}};
  return out;
}

json pruning_section(const ExperimentConfig& config, const json& voting) {
  const SurrogateModel model = config.model();
  const ScoreMatrix is = importance_from(voting, ScoreKind::importance);
  check_shape(is.values, model, "importance scores");
  const std::size_t k = config.pruning.k;

  Rng rng(stage_seed(config.seed, "pruning"));
  const Grid<double> jitter =
      draw_jitter_table(model.steps(), model.blocks(), config.probe.jitter_scale, rng);
  const StrategyDesign design = design_strategies(is, k, jitter);
  auto baselines = baseline_strategies(model.steps(), model.blocks(), k);
  baselines.push_back(top_importance_strategy(is, k, jitter));
  const auto strategies = merge_with_baselines(design.strategies, baselines);
  const auto scored = evaluate_strategies_parallel(model, strategies, config.pruning, config.jobs);

  json list = json::array();
  for (const auto& s : scored) list.push_back(strategy_to_json(s));
  return {{"k", k},
          {"raw_count", design.raw_count},
          {"recommended_count", design.strategies.size()},
          {"strategies", std::move(list)}};
}

json new_artifact(const ExperimentConfig& config) {
  const std::string now = utc_now();
  return {{"format_version", kArtifactFormatVersion},
          {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"deterministic", {{"config", experiment_config_to_json(config)}}},
          {"provenance",
           {{"created", now},
            {"updated", now},
            {"output_dir", config.output_dir},
            {"jobs", resolve_jobs(config.jobs)}}}};
}

json load_artifact(const std::filesystem::path& out_dir) {
  const auto path = out_dir / kArtifactFile;
  if (!std::filesystem::exists(path)) {
    throw ConfigError("no artifact at " + path.string() + "; run 'probe' first");
  }
  json artifact = read_json_file(path);
  validate_artifact(artifact);
  return artifact;
}

void save_artifact(json& artifact, const std::filesystem::path& out_dir) {
  artifact["provenance"]["updated"] = utc_now();
  validate_artifact(artifact);
  write_text_file(out_dir / kArtifactFile, artifact.dump(2) + "\n");
}

ExperimentConfig config_from_artifact(const json& artifact, const ExperimentConfig& base) {
  ExperimentConfig config =
      experiment_config_from_json(artifact.at("deterministic").at("config"));
  config.jobs = base.jobs;
  config.output_dir = base.output_dir;
  return config;
}

int cmd_verify(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const auto rows = verify_rows(config);
    const std::string csv = verify_csv(model_label(config), rows);
    write_text_file(std::filesystem::path(config.output_dir) / "verify_report.csv", csv);
    out << csv;
    bool breach = false;
    for (const auto& r : rows) {
      if (!(r.relative_error <= config.verify.tolerance)) {
        breach = true;
        err << "tolerance breach: step " << r.step << " weights " << r.weights
            << " relative error " << format_double(r.relative_error) << " > "
            << format_double(config.verify.tolerance) << '\n';
      }
    }
    return breach ? kExitToleranceBreach : kExitOk;
  });
}

int cmd_probe(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const std::filesystem::path dir(config.output_dir);
    json artifact = new_artifact(config);
    json probe = probe_section(config);

    // Downstream stages stay valid only if they were computed from the same inputs.
    const auto path = dir / kArtifactFile;
    if (std::filesystem::exists(path)) {
      const json previous = read_json_file(path);
      const json& d = previous.at("deterministic");
      if (d.at("config") == artifact["deterministic"]["config"] && d.contains("probe") &&
          d.at("probe") == probe) {
        artifact["deterministic"] = d;
        artifact["provenance"]["created"] = previous.at("provenance").at("created");
      }
    }
    artifact["deterministic"]["probe"] = std::move(probe);
    save_artifact(artifact, dir);
    out << "probe: " << config.probe.runs << " runs written to " << path.string() << '\n';
    return kExitOk;
  });
}

int cmd_vote(const ExperimentConfig& base, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::filesystem::path dir(base.output_dir);
    json artifact = load_artifact(dir);
    const ExperimentConfig config = config_from_artifact(artifact, base);
    config.validate();
    json voting = voting_section(config, require_stage(artifact, "probe", "probe"));
    export_voting(voting, dir);
    out << "vote: aggregate ranking (least to most important)\n";
    for (std::size_t t = 0; t < voting.at("ranking").size(); ++t) {
      out << "  step " << t << ": " << join_order(voting.at("ranking")[t]) << '\n';
    }
    const json& s = voting.at("stability");
    if (s.is_null()) {
      out << "  stability: not assessed (needs at least " << kStabilityPrefixes << " runs)\n";
    } else {
      out << "  stability: " << (s.at("stable").get<bool>() ? "stable" : "unstable")
          << ", max prefix distance " << s.at("max_prefix_distance").get<std::size_t>()
          << ", bound " << format_double(s.at("bound").get<double>()) << '\n';
    }
    artifact["deterministic"]["voting"] = std::move(voting);
    save_artifact(artifact, dir);
    return kExitOk;
  });
}

int cmd_reweight(const ExperimentConfig& base, const StageOverrides& overrides,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::filesystem::path dir(base.output_dir);
    json artifact = load_artifact(dir);
    ExperimentConfig config = config_from_artifact(artifact, base);
    if (overrides.low) config.schedule.low = *overrides.low;
    if (overrides.high) config.schedule.high = *overrides.high;
    config.validate();
    json schedule = schedule_section(config, require_stage(artifact, "voting", "vote"));
    export_schedule(schedule, dir);

    out << "reweight: range [" << format_double(config.schedule.low) << ", "
        << format_double(config.schedule.high) << "]"
        << (schedule.at("recommended_range").get<bool>() ? "" : " (outside recommended range)")
        << "\n  variance ratio vs unit weights (surrogate; no perceptual metric)\n";
    for (std::size_t t = 0; t < schedule.at("report").size(); ++t) {
      out << "  step " << t << ": importance "
          << format_double(schedule.at("report")[t].at("ratio").get<double>()) << ", inverted "
          << format_double(schedule.at("inverted").at("report")[t].at("ratio").get<double>())
          << '\n';
    }
    auto& echo = artifact["deterministic"]["config"]["schedule"];
    echo["low"] = config.schedule.low;
    echo["high"] = config.schedule.high;
    artifact["deterministic"]["schedule"] = std::move(schedule);
    save_artifact(artifact, dir);
    return kExitOk;
  });
}

int cmd_prune(const ExperimentConfig& base, const StageOverrides& overrides, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const std::filesystem::path dir(base.output_dir);
    json artifact = load_artifact(dir);
    ExperimentConfig config = config_from_artifact(artifact, base);
    if (overrides.k) config.pruning.k = *overrides.k;
    config.validate();
    json pruning = pruning_section(config, require_stage(artifact, "voting", "vote"));
    export_pruning(pruning, dir);

    out << "prune: k = " << config.pruning.k << ", "
        << pruning.at("raw_count").get<std::size_t>() << " raw recommended, "
        << pruning.at("recommended_count").get<std::size_t>() << " distinct, "
        << pruning.at("strategies").size() << " scored with baselines\n";
    artifact["deterministic"]["config"]["pruning"]["k"] = config.pruning.k;
    artifact["deterministic"]["pruning"] = std::move(pruning);
    save_artifact(artifact, dir);
    return kExitOk;
  });
}

int cmd_report(const ExperimentConfig& base, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::filesystem::path dir(base.output_dir);
    const json artifact = load_artifact(dir);
    const json& d = artifact.at("deterministic");
    const json& tool = artifact.at("tool");
    out << tool.at("name").get<std::string>() << ' ' << tool.at("version").get<std::string>()
        << " artifact (format " << artifact.at("format_version").get<int>() << ")\n";
    out << "created " << artifact.at("provenance").value("created", "?") << ", updated "
        << artifact.at("provenance").value("updated", "?") << '\n';
    const json& model = d.at("config").at("model");
    out << "model: " << model.value("preset", std::string("custom")) << " ("
        << model.at("definition").at("steps").size() << " steps x "
        << model.at("definition").at("steps")[0].size() << " blocks)\n";

    if (d.contains("probe")) {
      std::size_t accepted = 0, rejected = 0;
      for (const auto& r : d.at("probe").at("runs")) {
        for (const auto& v : r.at("accepted")) accepted += v.get<std::size_t>();
        for (const auto& v : r.at("rejected")) rejected += v.get<std::size_t>();
      }
      out << "probe: " << d.at("probe").at("runs").size() << " runs, " << accepted
          << " accepted / " << rejected << " rejected step updates\n";
    }
    if (d.contains("voting")) {
      const json& v = d.at("voting");
      export_voting(v, dir);
      out << "voting: aggregate ranking (least to most important)\n";
      for (std::size_t t = 0; t < v.at("ranking").size(); ++t) {
        out << "  step " << t << ": " << join_order(v.at("ranking")[t]) << '\n';
      }
      if (!v.at("stability").is_null()) {
        out << "  stable: " << (v.at("stability").at("stable").get<bool>() ? "yes" : "no")
            << '\n';
      }
    }
    if (d.contains("schedule")) {
      export_schedule(d.at("schedule"), dir);
      out << "schedule: ratios";
      for (const auto& r : d.at("schedule").at("report")) {
        out << ' ' << format_double(r.at("ratio").get<double>());
      }
      out << '\n';
    }
    if (d.contains("pruning")) {
      export_pruning(d.at("pruning"), dir);
      out << "pruning: " << d.at("pruning").at("strategies").size() << " strategies scored\n";
    }
    return kExitOk;
  });
}

}  // namespace blockprobe
