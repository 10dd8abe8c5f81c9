#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blockprobe/config.hpp"
#include "blockprobe/serialize.hpp"

namespace blockprobe {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitToleranceBreach = 2 };

/// Flags that override the configuration echoed into an existing artifact.
struct StageOverrides {
  std::optional<double> low;
  std::optional<double> high;
  std::optional<std::size_t> k;
};

inline constexpr const char* kArtifactFile = "artifact.json";

struct VerifyRow {
  std::size_t step = 0;
  std::string weights;
  double analytic = 0.0;
  double monte_carlo = 0.0;
  double relative_error = 0.0;
  /// Closed form under the independence assumptions; differs from `analytic`
  /// only in the shared-noise regime.
  double approximation = 0.0;
  double approximation_gap = 0.0;
};

/// Monte Carlo against the exact closed form for unit, uniformly scaled and
/// random weight rows at every step.
std::vector<VerifyRow> verify_rows(const ExperimentConfig& config);
std::string verify_csv(const std::string& model_label, const std::vector<VerifyRow>& rows);

// Stage sections. Each is a pure function of its inputs.
json probe_section(const ExperimentConfig& config);
json voting_section(const ExperimentConfig& config, const json& probe);
json schedule_section(const ExperimentConfig& config, const json& voting);
json pruning_section(const ExperimentConfig& config, const json& voting);

/// Header, config echo and provenance around an empty deterministic section.
json new_artifact(const ExperimentConfig& config);

/// Loads `<out>/artifact.json`; throws Error if absent.
json load_artifact(const std::filesystem::path& out_dir);

/// Validates, stamps the update time and writes `<out>/artifact.json`.
void save_artifact(json& artifact, const std::filesystem::path& out_dir);

/// Config recovered from an artifact echo, with run-local settings from `base`.
ExperimentConfig config_from_artifact(const json& artifact, const ExperimentConfig& base);

int cmd_verify(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_probe(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_vote(const ExperimentConfig& base, std::ostream& out, std::ostream& err);
int cmd_reweight(const ExperimentConfig& base, const StageOverrides& overrides,
                 std::ostream& out, std::ostream& err);
int cmd_prune(const ExperimentConfig& base, const StageOverrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_report(const ExperimentConfig& base, std::ostream& out, std::ostream& err);

}  // namespace blockprobe
