#include "blockprobe/config.hpp"

#include "blockprobe/presets.hpp"

namespace blockprobe {

std::uint64_t stage_seed(std::uint64_t master, const char* stage) noexcept {
  return derive_seed(master, stage);
}

SurrogateModel ExperimentConfig::model() const {
  if (definition) return *definition;
  return make_preset(preset);
}

ProbeConfig ExperimentConfig::seeded_probe() const {
  ProbeConfig out = probe;
  out.seed = stage_seed(seed, "probe");
  return out;
}

void ExperimentConfig::validate() const {
  if (!definition) make_preset(preset);
  probe.validate();
  pruning.validate();
  if (!(schedule.low <= schedule.high)) {
    throw ConfigError("schedule range requires low <= high");
  }
  if (!(schedule.signal_power >= 0.0)) {
    throw ConfigError("schedule.signal_power must be non-negative");
  }
  if (verify.draws < 2) throw ConfigError("verify.draws must be at least 2");
  if (!(verify.tolerance > 0.0)) throw ConfigError("verify.tolerance must be positive");
  if (output_dir.empty()) throw ConfigError("output directory must not be empty");
}

}  // namespace blockprobe
