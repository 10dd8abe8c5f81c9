#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blockprobe/rng.hpp"
#include "blockprobe/surrogate.hpp"

namespace blockprobe {

inline constexpr std::size_t kDefaultDim = 16;

/// Names accepted by make_preset.
const std::vector<std::string>& preset_names();

/// Throws ConfigError on an unknown name.
SurrogateModel make_preset(const std::string& name);

/// Known extremes of a planted preset, per step.
struct PlantedTruth {
  std::vector<std::size_t> least_important;
  std::vector<std::size_t> most_important;
  /// Full intended order per step, least important first.
  std::vector<std::vector<std::size_t>> order;
};

/// Set for the planted-* presets only.
std::optional<PlantedTruth> planted_truth(const std::string& name);

/// Independent-regime model with A in [0.2, 1.5] and variances in [0.05, 2].
SurrogateModel random_independent_model(Rng& rng, std::size_t steps, std::size_t blocks,
                                        std::size_t dim = kDefaultDim);

}  // namespace blockprobe
