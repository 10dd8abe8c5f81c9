#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "blockprobe/probe.hpp"
#include "blockprobe/pruning.hpp"
#include "blockprobe/surrogate.hpp"

namespace blockprobe {

struct VotingOptions {
  std::size_t traversal_samples = 20;

  bool operator==(const VotingOptions&) const = default;
};

struct ScheduleOptions {
  double low = 0.95;
  double high = 1.02;
  double signal_power = 1.0;

  bool operator==(const ScheduleOptions&) const = default;
};

struct VerifyOptions {
  std::size_t draws = 200000;
  double tolerance = 0.02;

  bool operator==(const VerifyOptions&) const = default;
};

/// Everything one experiment needs. `probe.seed` is ignored: run seeds are
/// derived from `seed`.
struct ExperimentConfig {
  /// Preset name; ignored when `definition` is set.
  std::string preset = "planted-2x7";
  std::optional<SurrogateModel> definition;
  ProbeConfig probe;
  VotingOptions voting;
  ScheduleOptions schedule;
  PruningConfig pruning;
  VerifyOptions verify;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string output_dir = "blockprobe-out";

  /// The resolved surrogate (definition or preset).
  SurrogateModel model() const;

  /// Probe config with the stage seed derived from `seed`.
  ProbeConfig seeded_probe() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Seed of a pipeline stage under the master seed.
std::uint64_t stage_seed(std::uint64_t master, const char* stage) noexcept;

}  // namespace blockprobe
