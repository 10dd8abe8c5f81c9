#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockprobe/core.hpp"
#include "blockprobe/surrogate.hpp"

namespace blockprobe {

/// Per-step block output scales; unlike WeightMatrix, entries may exceed 1.
struct ReweightingSchedule {
  double low = 1.0;
  double high = 1.0;
  Grid<double> weights;

  bool operator==(const ReweightingSchedule&) const = default;
};

/// w = score * (high - low) + low; constant `high` when low == high.
ReweightingSchedule build_schedule(const ScoreMatrix& scores, double low, double high);

/// All-ones schedule of the given shape.
ReweightingSchedule vanilla_schedule(std::size_t steps, std::size_t blocks);

struct StepVarianceReport {
  std::size_t step = 0;
  double variance = 0.0;
  double vanilla_variance = 0.0;
  /// variance / vanilla_variance; 1 when both vanish.
  double ratio = 1.0;
  std::optional<double> snr;
  std::optional<double> vanilla_snr;

  bool operator==(const StepVarianceReport&) const = default;
};

/// Error variance (exact for the model's regime) under each schedule row and
/// under unit weights, with SNR at the given signal power where defined.
std::vector<StepVarianceReport> evaluate_schedule(const SurrogateModel& model,
                                                  const ReweightingSchedule& schedule,
                                                  double signal_power = 1.0);

struct WeightRange {
  std::string name;
  double low = 1.0;
  double high = 1.0;
};

/// Named ranges; "default" is the range used when none is given.
const std::vector<WeightRange>& weight_range_presets();
const WeightRange& weight_range_preset(const std::string& name);

/// low slightly below 1 and high in (1, 1.15). Advisory only.
bool is_recommended_range(double low, double high) noexcept;

}  // namespace blockprobe
