#include "blockprobe/surrogate.hpp"

#include <cmath>
#include <string>

#include "blockprobe/stats.hpp"

namespace blockprobe {

DiffusionSchedule::DiffusionSchedule(std::vector<double> alpha_bar)
    : alpha_bar_(std::move(alpha_bar)) {
  for (std::size_t t = 0; t < alpha_bar_.size(); ++t) {
    const double a = alpha_bar_[t];
    if (!(a > 0.0 && a <= 1.0)) throw Error("alpha_bar entries must lie in (0, 1]");
    if (t > 0 && !(a < alpha_bar_[t - 1])) {
      throw Error("alpha_bar must be strictly decreasing");
    }
  }
}

DiffusionSchedule DiffusionSchedule::geometric(std::size_t count, double first,
                                               double last) {
  std::vector<double> values(count);
  if (count == 1) {
    values[0] = first;
  } else {
    const double ratio = std::pow(last / first, 1.0 / static_cast<double>(count - 1));
    double v = first;
    for (std::size_t t = 0; t < count; ++t, v *= ratio) values[t] = v;
    values.back() = last;
  }
  return DiffusionSchedule(std::move(values));
}

const char* to_string(Regime regime) noexcept {
  return regime == Regime::independent ? "independent" : "shared-noise";
}

SurrogateModel::SurrogateModel(Grid<BlockSpec> specs, std::size_t dim, Regime regime,
                               DiffusionSchedule schedule)
    : specs_(std::move(specs)), dim_(dim), regime_(regime), schedule_(std::move(schedule)) {
  if (specs_.steps() == 0 || specs_.blocks() == 0) {
    throw Error("surrogate needs at least one step and one block");
  }
  if (dim_ == 0) throw Error("surrogate dimension must be positive");
  if (schedule_.size() == 0) schedule_ = DiffusionSchedule::geometric(steps() + 1);

  for (std::size_t t = 0; t < steps(); ++t) {
    double gain = 0.0;
    for (const BlockSpec& s : specs_.row(t)) {
      if (!std::isfinite(s.a_coeff)) throw Error("block coefficient must be finite");
      if (!(s.var_f >= 0.0 && s.var_g >= 0.0 && s.var_n >= 0.0)) {
        throw Error("block variances must be non-negative");
      }
      gain += s.a_coeff * std::sqrt(s.var_g);
    }
    if (regime_ == Regime::shared_noise && std::abs(gain - 1.0) > 1e-9) {
      throw Error("shared-noise calibration violated at step " + std::to_string(t) +
                  ": sum A_i sqrt(var_g_i) = " + std::to_string(gain));
    }
  }
}

namespace {

void fill_normal(std::vector<double>& out, std::size_t dim, double stddev, Rng& rng,
                 std::normal_distribution<double>& normal) {
  out.resize(dim);
  for (double& v : out) v = stddev * normal(rng);
}

}  // namespace

void sample_step_into(const SurrogateModel& model, std::size_t step, Rng& rng,
                      StepSample& out) {
  if (step >= model.steps()) throw Error("step index out of range");
  const std::size_t m = model.blocks();
  const std::size_t d = model.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  out.blocks.resize(m);
  out.eps.assign(d, 0.0);

  if (model.regime() == Regime::independent) {
    out.x0.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const BlockSpec& s = model.spec(step, i);
      BlockSample& b = out.blocks[i];
      fill_normal(b.f, d, std::sqrt(s.var_f), rng, normal);
      fill_normal(b.g, d, std::sqrt(s.var_g), rng, normal);
      fill_normal(b.n, d, std::sqrt(s.var_n), rng, normal);
      for (std::size_t c = 0; c < d; ++c) out.eps[c] += s.a_coeff * b.g[c];
    }
    return;
  }

  fill_normal(out.eps, d, 1.0, rng, normal);
  fill_normal(out.x0, d, 1.0, rng, normal);
  for (std::size_t i = 0; i < m; ++i) {
    const BlockSpec& s = model.spec(step, i);
    const double f_gain = std::sqrt(s.var_f);
    const double g_gain = std::sqrt(s.var_g);
    BlockSample& b = out.blocks[i];
    b.f.resize(d);
    b.g.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      b.f[c] = f_gain * out.x0[c];
      b.g[c] = g_gain * out.eps[c];
    }
    fill_normal(b.n, d, std::sqrt(s.var_n), rng, normal);
  }
}

StepSample sample_step(const SurrogateModel& model, std::size_t step, Rng& rng) {
  StepSample out;
  sample_step_into(model, step, rng, out);
  return out;
}

void predict_noise_into(const SurrogateModel& model, std::size_t step,
                        const StepSample& sample, std::span<const double> weights,
                        std::span<const std::size_t> skip, std::vector<double>& out) {
  const std::size_t m = model.blocks();
  if (weights.size() != m) throw Error("weight row length must equal block count");
  if (sample.blocks.size() != m) throw Error("sample does not match model");
  for (std::size_t i : skip) {
    if (i >= m) throw Error("skip index out of range");
  }
  out.assign(model.dim(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    bool skipped = false;
    for (std::size_t s : skip) skipped = skipped || s == i;
    if (skipped) continue;
    const double scale = model.spec(step, i).a_coeff * weights[i];
    const BlockSample& b = sample.blocks[i];
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] += scale * (b.f[c] + b.g[c] + b.n[c]);
    }
  }
}

std::vector<double> predict_noise(const SurrogateModel& model, std::size_t step,
                                  const StepSample& sample,
                                  std::span<const double> weights,
                                  std::span<const std::size_t> skip) {
  std::vector<double> out;
  predict_noise_into(model, step, sample, weights, skip, out);
  return out;
}

ErrorVariance analytic_error_variance(const SurrogateModel& model, std::size_t step,
                                      std::span<const double> weights) {
  if (step >= model.steps()) throw Error("step index out of range");
  if (weights.size() != model.blocks()) {
    throw Error("weight row length must equal block count");
  }
  ErrorVariance out;
  double noise_gain = 0.0;
  double signal_gain = 0.0;
  double intrinsic = 0.0;
  for (std::size_t i = 0; i < model.blocks(); ++i) {
    const BlockSpec& s = model.spec(step, i);
    const double a2 = s.a_coeff * s.a_coeff;
    const double w = weights[i];
    out.approximation += a2 * (w - 1.0) * (w - 1.0) * s.var_g + a2 * w * w * s.var_f +
                         a2 * w * w * s.var_n;
    noise_gain += s.a_coeff * w * std::sqrt(s.var_g);
    signal_gain += s.a_coeff * w * std::sqrt(s.var_f);
    intrinsic += a2 * w * w * s.var_n;
  }
  if (model.regime() == Regime::independent) {
    out.exact = out.approximation;
  } else {
    // eps and x0 are unit-variance per component.
    out.exact = (1.0 - noise_gain) * (1.0 - noise_gain) + signal_gain * signal_gain + intrinsic;
  }
  return out;
}

double monte_carlo_error_variance(const SurrogateModel& model, std::size_t step,
                                  std::span<const double> weights, std::size_t draws,
                                  Rng& rng) {
  if (draws == 0) throw Error("draws must be positive");
  ComponentMoments moments(model.dim());
  StepSample sample;
  std::vector<double> predicted;
  std::vector<double> error(model.dim());
  for (std::size_t k = 0; k < draws; ++k) {
    sample_step_into(model, step, rng, sample);
    predict_noise_into(model, step, sample, weights, {}, predicted);
    for (std::size_t c = 0; c < error.size(); ++c) error[c] = sample.eps[c] - predicted[c];
    moments.add(error);
  }
  return moments.mean_variance();
}

double snr(double signal_power, double error_variance) {
  if (!(error_variance > 0.0)) throw Error("error variance must be positive");
  return signal_power / error_variance;
}

std::vector<double> ddim_reverse_step(std::span<const double> x_t,
                                      std::span<const double> eps_hat, double alpha_bar_t,
                                      double alpha_bar_prev) {
  if (x_t.size() != eps_hat.size()) throw Error("x_t and eps_hat differ in length");
  if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0 && alpha_bar_prev > 0.0 &&
        alpha_bar_prev <= 1.0)) {
    throw Error("alpha_bar entries must lie in (0, 1]");
  }
  const double noise_t = std::sqrt(1.0 - alpha_bar_t);
  const double noise_prev = std::sqrt(1.0 - alpha_bar_prev);
  const double scale = std::sqrt(alpha_bar_prev) / std::sqrt(alpha_bar_t);
  std::vector<double> out(x_t.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = scale * (x_t[c] - noise_t * eps_hat[c]) + noise_prev * eps_hat[c];
  }
  return out;
}

std::vector<double> ddim_reverse_step(std::span<const double> x_t,
                                      std::span<const double> eps_hat,
                                      const DiffusionSchedule& schedule, std::size_t t) {
  if (t == 0) throw Error("no previous step");
  if (t >= schedule.size()) throw Error("schedule index out of range");
  return ddim_reverse_step(x_t, eps_hat, schedule[t], schedule[t - 1]);
}

}  // namespace blockprobe
