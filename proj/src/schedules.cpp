#include "blockprobe/schedules.hpp"

#include <limits>

namespace blockprobe {

ReweightingSchedule build_schedule(const ScoreMatrix& scores, double low, double high) {
  if (scores.kind == ScoreKind::voting) {
    throw Error("schedule needs importance or inverted-importance scores");
  }
  if (!(low <= high)) throw Error("weight range requires low <= high");
  const Grid<double>& is = scores.values;
  ReweightingSchedule out{low, high, Grid<double>(is.steps(), is.blocks(), high)};
  if (low == high) return out;
  for (std::size_t t = 0; t < is.steps(); ++t) {
    for (std::size_t i = 0; i < is.blocks(); ++i) {
      out.weights(t, i) = is(t, i) * (high - low) + low;
    }
  }
  return out;
}

ReweightingSchedule vanilla_schedule(std::size_t steps, std::size_t blocks) {
  return {1.0, 1.0, Grid<double>(steps, blocks, 1.0)};
}

std::vector<StepVarianceReport> evaluate_schedule(const SurrogateModel& model,
                                                  const ReweightingSchedule& schedule,
                                                  double signal_power) {
  if (schedule.weights.steps() != model.steps() ||
      schedule.weights.blocks() != model.blocks()) {
    throw Error("schedule shape differs from model");
  }
  if (!(signal_power >= 0.0)) throw Error("signal power must be non-negative");
  const std::vector<double> ones(model.blocks(), 1.0);
  std::vector<StepVarianceReport> out;
  out.reserve(model.steps());
  for (std::size_t t = 0; t < model.steps(); ++t) {
    StepVarianceReport r;
    r.step = t;
    r.variance = analytic_error_variance(model, t, schedule.weights.row(t)).exact;
    r.vanilla_variance = analytic_error_variance(model, t, ones).exact;
    if (r.vanilla_variance > 0.0) {
      r.ratio = r.variance / r.vanilla_variance;
    } else {
      r.ratio = r.variance > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    if (r.variance > 0.0) r.snr = snr(signal_power, r.variance);
    if (r.vanilla_variance > 0.0) r.vanilla_snr = snr(signal_power, r.vanilla_variance);
    out.push_back(r);
  }
  return out;
}

const std::vector<WeightRange>& weight_range_presets() {
  static const std::vector<WeightRange> presets{
      {"default", 0.95, 1.02},
      {"mild", 0.98, 1.1},
      {"boost", 1.02, 1.1},
      {"wide", 0.95, 1.15},
  };
  return presets;
}

const WeightRange& weight_range_preset(const std::string& name) {
  for (const auto& p : weight_range_presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown weight range preset: " + name);
}

bool is_recommended_range(double low, double high) noexcept {
  return low < 1.0 && low >= 0.9 && high > 1.0 && high < 1.15;
}

}  // namespace blockprobe
