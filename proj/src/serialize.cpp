#include "blockprobe/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace blockprobe {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + section);
  }
}

double get_real(const json& j, const char* key, double fallback, const std::string& section) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(section + "." + key + " must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const char* key, std::uint64_t fallback,
                        const std::string& section) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(section + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_text(const json& j, const char* key, const std::string& fallback,
                     const std::string& section) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(section + "." + key + " must be a string");
  return v.get<std::string>();
}

json triple_to_json(const ProbabilityTriple& p) {
  return json::array({p.too_high, p.moderate, p.too_low});
}

ProbabilityTriple triple_from_json(const json& j, const std::string& section) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(section + " must be an array of three probabilities");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(section + " entries must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json schedule_pair_to_json(const ProbabilitySchedule& s) {
  return {{"start", triple_to_json(s.start)}, {"end", triple_to_json(s.end)}};
}

ProbabilitySchedule schedule_pair_from_json(const json& j, const ProbabilitySchedule& fallback,
                                            const std::string& section) {
  check_keys(j, {"start", "end"}, section);
  ProbabilitySchedule out = fallback;
  if (j.contains("start")) out.start = triple_from_json(j.at("start"), section + ".start");
  if (j.contains("end")) out.end = triple_from_json(j.at("end"), section + ".end");
  return out;
}

json counts_to_json(const std::vector<std::size_t>& v) { return json(v); }

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  // Prefer the shortest representation that still round-trips.
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, value);
    if (std::strtod(shorter, nullptr) == value) return shorter;
  }
  return buf;
}

json grid_to_json(const Grid<double>& grid) {
  json rows = json::array();
  for (std::size_t t = 0; t < grid.steps(); ++t) {
    const auto row = grid.row(t);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Grid<double> grid_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw Error(what + " must be a non-empty array of non-empty rows");
  }
  Grid<double> out(j.size(), j[0].size());
  for (std::size_t t = 0; t < j.size(); ++t) {
    if (!j[t].is_array() || j[t].size() != out.blocks()) throw Error(what + " rows differ in length");
    for (std::size_t i = 0; i < out.blocks(); ++i) {
      if (!j[t][i].is_number()) throw Error(what + " entries must be numbers");
      out(t, i) = j[t][i].get<double>();
    }
  }
  return out;
}

json model_to_json(const SurrogateModel& model) {
  json steps = json::array();
  for (std::size_t t = 0; t < model.steps(); ++t) {
    json row = json::array();
    for (const BlockSpec& s : model.specs().row(t)) {
      row.push_back({{"a", s.a_coeff}, {"var_f", s.var_f}, {"var_g", s.var_g}, {"var_n", s.var_n}});
    }
    steps.push_back(std::move(row));
  }
  return {{"regime", to_string(model.regime())},
          {"dim", model.dim()},
          {"alpha_bar", model.schedule().values()},
          {"steps", std::move(steps)}};
}

SurrogateModel model_from_json(const json& j) {
  const std::string section = "model.definition";
  check_keys(j, {"regime", "dim", "alpha_bar", "steps"}, section);
  const std::string regime_text = get_text(j, "regime", "independent", section);
  Regime regime;
  if (regime_text == "independent") {
    regime = Regime::independent;
  } else if (regime_text == "shared-noise") {
    regime = Regime::shared_noise;
  } else {
    throw ConfigError("unknown regime: " + regime_text);
  }
  const auto dim = get_count(j, "dim", 16, section);
  if (!j.contains("steps") || !j.at("steps").is_array() || j.at("steps").empty()) {
    throw ConfigError(section + ".steps must be a non-empty array");
  }
  const json& steps = j.at("steps");
  const std::size_t m = steps[0].is_array() ? steps[0].size() : 0;
  if (m == 0) throw ConfigError(section + ".steps rows must be non-empty arrays");
  Grid<BlockSpec> specs(steps.size(), m);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (!steps[t].is_array() || steps[t].size() != m) {
      throw ConfigError(section + ".steps rows differ in length");
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::string where = section + ".steps[" + std::to_string(t) + "][" +
                                std::to_string(i) + "]";
      const json& b = steps[t][i];
      check_keys(b, {"a", "var_f", "var_g", "var_n"}, where);
      specs(t, i) = {get_real(b, "a", 1.0, where), get_real(b, "var_f", 0.0, where),
                     get_real(b, "var_g", 0.0, where), get_real(b, "var_n", 0.0, where)};
    }
  }
  DiffusionSchedule schedule;
  if (j.contains("alpha_bar")) {
    if (!j.at("alpha_bar").is_array()) throw ConfigError(section + ".alpha_bar must be an array");
    try {
      schedule = DiffusionSchedule(j.at("alpha_bar").get<std::vector<double>>());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(section + ".alpha_bar: " + e.what());
    }
  }
  try {
    return SurrogateModel(std::move(specs), dim, regime, std::move(schedule));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

json probe_config_to_json(const ProbeConfig& c) {
  return {{"runs", c.runs},
          {"perturbations_per_run", c.perturbations_per_run},
          {"candidates_per_perturbation", c.candidates_per_perturbation},
          {"tol_start", c.tol_start},
          {"tol_end", c.tol_end},
          {"bias_start", c.bias_start},
          {"bias_end", c.bias_end},
          {"epsilon_margin", c.epsilon_margin},
          {"jitter_scale", c.jitter_scale},
          {"update_probs",
           {{"accepted", schedule_pair_to_json(c.update_probs.accepted)},
            {"rejected", schedule_pair_to_json(c.update_probs.rejected)}}}};
}

ProbeConfig probe_config_from_json(const json& j) {
  const std::string s = "probe";
  check_keys(j, {"runs", "perturbations_per_run", "candidates_per_perturbation", "tol_start",
                 "tol_end", "bias_start", "bias_end", "epsilon_margin", "jitter_scale",
                 "update_probs"},
             s);
  ProbeConfig c;
  c.runs = get_count(j, "runs", c.runs, s);
  c.perturbations_per_run = get_count(j, "perturbations_per_run", c.perturbations_per_run, s);
  c.candidates_per_perturbation =
      get_count(j, "candidates_per_perturbation", c.candidates_per_perturbation, s);
  c.tol_start = get_real(j, "tol_start", c.tol_start, s);
  c.tol_end = get_real(j, "tol_end", c.tol_end, s);
  c.bias_start = get_real(j, "bias_start", c.bias_start, s);
  c.bias_end = get_real(j, "bias_end", c.bias_end, s);
  c.epsilon_margin = get_real(j, "epsilon_margin", c.epsilon_margin, s);
  c.jitter_scale = get_real(j, "jitter_scale", c.jitter_scale, s);
  if (j.contains("update_probs")) {
    const json& u = j.at("update_probs");
    check_keys(u, {"accepted", "rejected"}, "probe.update_probs");
    if (u.contains("accepted")) {
      c.update_probs.accepted = schedule_pair_from_json(
          u.at("accepted"), c.update_probs.accepted, "probe.update_probs.accepted");
    }
    if (u.contains("rejected")) {
      c.update_probs.rejected = schedule_pair_from_json(
          u.at("rejected"), c.update_probs.rejected, "probe.update_probs.rejected");
    }
  }
  return c;
}

json pruning_config_to_json(const PruningConfig& c) {
  return {{"k", c.k},
          {"trials", c.trials},
          {"eval_trials", c.eval_trials},
          {"train_seed", c.train_seed},
          {"test_seed", c.test_seed}};
}

PruningConfig pruning_config_from_json(const json& j) {
  const std::string s = "pruning";
  check_keys(j, {"k", "trials", "eval_trials", "train_seed", "test_seed"}, s);
  PruningConfig c;
  c.k = get_count(j, "k", c.k, s);
  c.trials = get_count(j, "trials", c.trials, s);
  c.eval_trials = get_count(j, "eval_trials", c.eval_trials, s);
  c.train_seed = get_count(j, "train_seed", c.train_seed, s);
  c.test_seed = get_count(j, "test_seed", c.test_seed, s);
  return c;
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json model = {{"definition", model_to_json(c.model())}};
  if (!c.preset.empty()) model["preset"] = c.preset;
  return {{"seed", c.seed},
          {"model", std::move(model)},
          {"probe", probe_config_to_json(c.probe)},
          {"voting", {{"traversal_samples", c.voting.traversal_samples}}},
          {"schedule",
           {{"low", c.schedule.low},
            {"high", c.schedule.high},
            {"signal_power", c.schedule.signal_power}}},
          {"pruning", pruning_config_to_json(c.pruning)},
          {"verify", {{"draws", c.verify.draws}, {"tolerance", c.verify.tolerance}}}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  check_keys(j, {"seed", "jobs", "output_dir", "model", "probe", "voting", "schedule", "pruning",
                 "verify"},
             "config");
  ExperimentConfig c;
  c.seed = get_count(j, "seed", c.seed, "config");
  c.jobs = get_count(j, "jobs", c.jobs, "config");
  c.output_dir = get_text(j, "output_dir", c.output_dir, "config");
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"preset", "definition"}, "model");
    // A full definition wins; a preset name next to it is kept as a label.
    if (m.contains("definition")) {
      c.definition = model_from_json(m.at("definition"));
      c.preset = get_text(m, "preset", "", "model");
    } else {
      c.preset = get_text(m, "preset", c.preset, "model");
    }
  }
  if (j.contains("probe")) c.probe = probe_config_from_json(j.at("probe"));
  if (j.contains("voting")) {
    const json& v = j.at("voting");
    check_keys(v, {"traversal_samples"}, "voting");
    c.voting.traversal_samples =
        get_count(v, "traversal_samples", c.voting.traversal_samples, "voting");
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    check_keys(s, {"low", "high", "signal_power"}, "schedule");
    c.schedule.low = get_real(s, "low", c.schedule.low, "schedule");
    c.schedule.high = get_real(s, "high", c.schedule.high, "schedule");
    c.schedule.signal_power = get_real(s, "signal_power", c.schedule.signal_power, "schedule");
  }
  if (j.contains("pruning")) c.pruning = pruning_config_from_json(j.at("pruning"));
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    check_keys(v, {"draws", "tolerance"}, "verify");
    c.verify.draws = get_count(v, "draws", c.verify.draws, "verify");
    c.verify.tolerance = get_real(v, "tolerance", c.verify.tolerance, "verify");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return experiment_config_from_json(j);
}

json ranking_to_json(const RankingSequence& ranking) {
  json out = json::array();
  for (const auto& p : ranking.per_step()) out.push_back(p.order());
  return out;
}

RankingSequence ranking_from_json(const json& j) {
  if (!j.is_array()) throw Error("ranking must be an array");
  std::vector<Permutation> per_step;
  for (const auto& row : j) per_step.emplace_back(row.get<std::vector<std::size_t>>());
  return RankingSequence(std::move(per_step));
}

json probe_result_to_json(const ProbeRunResult& r) {
  return {{"seed", r.seed},
          {"thresholds", grid_to_json(r.thresholds.grid())},
          {"best_weights", grid_to_json(r.best_weights.grid())},
          {"ranking", ranking_to_json(r.ranking)},
          {"accepted", counts_to_json(r.accepted_count)},
          {"rejected", counts_to_json(r.rejected_count)}};
}

ProbeRunResult probe_result_from_json(const json& j) {
  ProbeRunResult r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.thresholds = ThresholdMatrix(grid_from_json(j.at("thresholds"), "thresholds"));
  r.best_weights = WeightMatrix(grid_from_json(j.at("best_weights"), "best_weights"));
  r.ranking = ranking_from_json(j.at("ranking"));
  r.accepted_count = j.at("accepted").get<std::vector<std::size_t>>();
  r.rejected_count = j.at("rejected").get<std::vector<std::size_t>>();
  return r;
}

json schedule_to_json(const ReweightingSchedule& schedule,
                      const std::vector<StepVarianceReport>& report) {
  json rows = json::array();
  for (const auto& r : report) {
    json row = {{"step", r.step},
                {"variance", r.variance},
                {"vanilla_variance", r.vanilla_variance},
                {"ratio", r.ratio}};
    row["snr"] = r.snr ? json(*r.snr) : json(nullptr);
    row["vanilla_snr"] = r.vanilla_snr ? json(*r.vanilla_snr) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return {{"low", schedule.low},
          {"high", schedule.high},
          {"weights", grid_to_json(schedule.weights)},
          {"report", std::move(rows)}};
}

ReweightingSchedule schedule_from_json(const json& j) {
  ReweightingSchedule s;
  s.low = j.at("low").get<double>();
  s.high = j.at("high").get<double>();
  s.weights = grid_from_json(j.at("weights"), "schedule weights");
  if (!(s.low <= s.high)) throw Error("schedule range requires low <= high");
  return s;
}

json strategy_to_json(const ScoredStrategy& scored) {
  const SkippingStrategy& s = scored.strategy;
  return {{"name", s.name},
          {"origin", to_string(s.origin)},
          {"overlaps_baseline", s.overlaps_baseline},
          {"per_step", s.per_step},
          {"weights", grid_to_json(scored.weights)},
          {"train_mse", scored.score.train_mse},
          {"test_mse", scored.score.test_mse}};
}

SkippingStrategy strategy_from_json(const json& j) {
  SkippingStrategy s;
  s.name = j.at("name").get<std::string>();
  s.origin = strategy_origin_from_string(j.at("origin").get<std::string>());
  s.overlaps_baseline = j.value("overlaps_baseline", false);
  s.per_step = j.at("per_step").get<std::vector<std::vector<std::size_t>>>();
  return s;
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error("artifact schema: " + path + " " + what);
}

const json& require(const json& parent, const char* key, const std::string& path) {
  if (!parent.is_object() || !parent.contains(key)) schema_error(path + "." + key, "is missing");
  return parent.at(key);
}

void require_type(const json& parent, const char* key, const std::string& path,
                  json::value_t type) {
  const json& v = require(parent, key, path);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type;
  if (!ok) schema_error(path + "." + key, std::string("must be ") + json(type).type_name());
}

void require_grid(const json& parent, const char* key, const std::string& path) {
  const json& v = require(parent, key, path);
  if (!v.is_array() || v.empty()) schema_error(path + "." + key, "must be a non-empty array");
  for (const auto& row : v) {
    if (!row.is_array() || row.size() != v[0].size()) {
      schema_error(path + "." + key, "must be a rectangular array of rows");
    }
    for (const auto& x : row) {
      if (!x.is_number()) schema_error(path + "." + key, "must contain numbers");
    }
  }
}

void require_report(const json& parent, const std::string& path) {
  const json& rows = require(parent, "report", path);
  if (!rows.is_array()) schema_error(path + ".report", "must be an array");
  for (const auto& r : rows) {
    for (const char* key : {"step", "variance", "vanilla_variance", "ratio"}) {
      if (!r.contains(key) || !r.at(key).is_number()) {
        schema_error(path + ".report[]." + key, "must be a number");
      }
    }
  }
}

}  // namespace

void validate_artifact(const json& a) {
  using vt = json::value_t;
  if (!a.is_object()) schema_error("$", "must be an object");
  const json& version = require(a, "format_version", "$");
  if (!version.is_number_integer() || version.get<int>() != kArtifactFormatVersion) {
    schema_error("$.format_version", "must equal " + std::to_string(kArtifactFormatVersion));
  }
  const json& tool = require(a, "tool", "$");
  require_type(tool, "name", "$.tool", vt::string);
  require_type(tool, "version", "$.tool", vt::string);
  require_type(a, "provenance", "$", vt::object);

  const json& d = require(a, "deterministic", "$");
  if (!d.is_object()) schema_error("$.deterministic", "must be an object");
  for (const auto& item : d.items()) {
    const std::string& k = item.key();
    if (k != "config" && k != "probe" && k != "voting" && k != "schedule" && k != "pruning") {
      schema_error("$.deterministic." + k, "is not a known section");
    }
  }
  require_type(d, "config", "$.deterministic", vt::object);

  if (d.contains("probe")) {
    const std::string p = "$.deterministic.probe";
    const json& runs = require(d.at("probe"), "runs", p);
    if (!runs.is_array() || runs.empty()) schema_error(p + ".runs", "must be a non-empty array");
    for (const auto& r : runs) {
      require_type(r, "seed", p + ".runs[]", vt::number_unsigned);
      require_grid(r, "thresholds", p + ".runs[]");
      require_grid(r, "best_weights", p + ".runs[]");
      require_grid(r, "ranking", p + ".runs[]");
      require_type(r, "accepted", p + ".runs[]", vt::array);
      require_type(r, "rejected", p + ".runs[]", vt::array);
    }
  }
  if (d.contains("voting")) {
    const std::string p = "$.deterministic.voting";
    const json& v = d.at("voting");
    require_type(v, "runs", p, vt::number_unsigned);
    for (const char* key : {"voting", "importance", "inverted", "ranking"}) require_grid(v, key, p);
    // null when there were too few runs to assess stability
    const json& s = require(v, "stability", p);
    if (!s.is_null()) {
      require_type(s, "stable", p + ".stability", vt::boolean);
      require_type(s, "max_prefix_distance", p + ".stability", vt::number_unsigned);
      require_type(s, "bound", p + ".stability", vt::number_float);
      require_type(s, "traversals", p + ".stability", vt::number_unsigned);
    }
  }
  if (d.contains("schedule")) {
    const std::string p = "$.deterministic.schedule";
    const json& s = d.at("schedule");
    require_type(s, "low", p, vt::number_float);
    require_type(s, "high", p, vt::number_float);
    require_grid(s, "weights", p);
    require_report(s, p);
    const json& inv = require(s, "inverted", p);
    require_grid(inv, "weights", p + ".inverted");
    require_report(inv, p + ".inverted");
  }
  if (d.contains("pruning")) {
    const std::string p = "$.deterministic.pruning";
    const json& pr = d.at("pruning");
    require_type(pr, "k", p, vt::number_unsigned);
    require_type(pr, "raw_count", p, vt::number_unsigned);
    const json& list = require(pr, "strategies", p);
    if (!list.is_array()) schema_error(p + ".strategies", "must be an array");
    for (const auto& s : list) {
      require_type(s, "name", p + ".strategies[]", vt::string);
      require_type(s, "origin", p + ".strategies[]", vt::string);
      require_type(s, "overlaps_baseline", p + ".strategies[]", vt::boolean);
      require_type(s, "per_step", p + ".strategies[]", vt::array);
      require_type(s, "train_mse", p + ".strategies[]", vt::number_float);
      require_type(s, "test_mse", p + ".strategies[]", vt::number_float);
    }
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string grid_csv(const Grid<double>& grid) {
  std::ostringstream out;
  out << "step";
  for (std::size_t i = 0; i < grid.blocks(); ++i) out << ",block" << i;
  out << '\n';
  for (std::size_t t = 0; t < grid.steps(); ++t) {
    out << t;
    for (double v : grid.row(t)) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace blockprobe
