#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockprobe/config.hpp"
#include "blockprobe/core.hpp"
#include "blockprobe/probe.hpp"
#include "blockprobe/pruning.hpp"
#include "blockprobe/schedules.hpp"
#include "blockprobe/surrogate.hpp"
#include "blockprobe/voting.hpp"

namespace blockprobe {

using json = nlohmann::json;

inline constexpr int kArtifactFormatVersion = 1;
inline constexpr const char* kToolName = "blockprobe";
inline constexpr const char* kToolVersion = "0.3.0";

json grid_to_json(const Grid<double>& grid);
Grid<double> grid_from_json(const json& j, const std::string& what);

json model_to_json(const SurrogateModel& model);
SurrogateModel model_from_json(const json& j);

json probe_config_to_json(const ProbeConfig& config);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
ProbeConfig probe_config_from_json(const json& j);

json pruning_config_to_json(const PruningConfig& config);
PruningConfig pruning_config_from_json(const json& j);

/// Echo of every result-affecting setting, with the model resolved to a full
/// definition. Output directory and job count are left out.
json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

json probe_result_to_json(const ProbeRunResult& result);
ProbeRunResult probe_result_from_json(const json& j);

json ranking_to_json(const RankingSequence& ranking);
RankingSequence ranking_from_json(const json& j);

json schedule_to_json(const ReweightingSchedule& schedule,
                      const std::vector<StepVarianceReport>& report);
ReweightingSchedule schedule_from_json(const json& j);

json strategy_to_json(const ScoredStrategy& scored);
SkippingStrategy strategy_from_json(const json& j);

/// Throws Error naming the first offending path.
void validate_artifact(const json& artifact);

json read_json_file(const std::filesystem::path& path);
/// Writes to a temporary sibling, then renames over `path`.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// "step,block0,...": one row per step.
std::string grid_csv(const Grid<double>& grid);

}  // namespace blockprobe
