#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blockprobe/core.hpp"
#include "blockprobe/rng.hpp"

namespace blockprobe {

/// Cumulative signal retention alpha_bar[t]; strictly decreasing, each in (0, 1].
class DiffusionSchedule {
 public:
  DiffusionSchedule() = default;
  explicit DiffusionSchedule(std::vector<double> alpha_bar);

  /// Geometric decay from `first` to `last` over `count` entries.
  static DiffusionSchedule geometric(std::size_t count, double first = 0.9999,
                                     double last = 0.05);

  std::size_t size() const noexcept { return alpha_bar_.size(); }
  double operator[](std::size_t t) const { return alpha_bar_[t]; }
  const std::vector<double>& values() const noexcept { return alpha_bar_; }

  bool operator==(const DiffusionSchedule&) const = default;

 private:
  std::vector<double> alpha_bar_;
};

/// Coefficients of one block at one step. Variances are per latent component.
struct BlockSpec {
  double a_coeff = 1.0;  ///< combination coefficient into the noise prediction
  double var_f = 0.0;    ///< signal feature variance
  double var_g = 0.0;    ///< noise feature variance
  double var_n = 0.0;    ///< intrinsic block noise variance

  bool operator==(const BlockSpec&) const = default;
};

enum class Regime {
  /// f, g, n drawn independently per block; eps is defined as sum_i A_i g_i.
  independent,
  /// eps and x0 drawn once; g_i = G_i eps, f_i = F_i x0 with
  /// G_i = sqrt(var_g), F_i = sqrt(var_f) and sum_i A_i G_i = 1 per step.
  shared_noise,
};

const char* to_string(Regime regime) noexcept;

/// Synthetic block-decomposed denoiser. Immutable after construction.
class SurrogateModel {
 public:
  SurrogateModel(Grid<BlockSpec> specs, std::size_t dim, Regime regime,
                 DiffusionSchedule schedule = {});

  std::size_t steps() const noexcept { return specs_.steps(); }
  std::size_t blocks() const noexcept { return specs_.blocks(); }
  std::size_t dim() const noexcept { return dim_; }
  Regime regime() const noexcept { return regime_; }
  const Grid<BlockSpec>& specs() const noexcept { return specs_; }
  const BlockSpec& spec(std::size_t t, std::size_t i) const { return specs_(t, i); }
  const DiffusionSchedule& schedule() const noexcept { return schedule_; }

  bool operator==(const SurrogateModel&) const = default;

 private:
  Grid<BlockSpec> specs_;
  std::size_t dim_ = 0;
  Regime regime_ = Regime::independent;
  DiffusionSchedule schedule_;
};

struct BlockSample {
  std::vector<double> f;
  std::vector<double> g;
  std::vector<double> n;
};

/// One draw of all block outputs at a step, plus the true noise.
/// x0 is populated in the shared-noise regime only.
struct StepSample {
  std::vector<BlockSample> blocks;
  std::vector<double> eps;
  std::vector<double> x0;
};

/// Per-step sets of block indices whose contribution is removed.
struct SkipMask {
  std::vector<std::vector<std::size_t>> per_step;
};

StepSample sample_step(const SurrogateModel& model, std::size_t step, Rng& rng);

/// Allocation-free variant; reuses the buffers held by `out`.
void sample_step_into(const SurrogateModel& model, std::size_t step, Rng& rng,
                      StepSample& out);

/// sum over non-skipped i of A_i * w_i * (f_i + g_i + n_i).
std::vector<double> predict_noise(const SurrogateModel& model, std::size_t step,
                                  const StepSample& sample,
                                  std::span<const double> weights,
                                  std::span<const std::size_t> skip = {});

void predict_noise_into(const SurrogateModel& model, std::size_t step,
                        const StepSample& sample, std::span<const double> weights,
                        std::span<const std::size_t> skip, std::vector<double>& out);

struct ErrorVariance {
  /// Closed form sum A^2 (w-1)^2 Vg + sum A^2 w^2 Vf + sum A^2 w^2 Vn.
  double approximation = 0.0;
  /// True variance of eps - eps_hat under the model's regime.
  double exact = 0.0;
};

ErrorVariance analytic_error_variance(const SurrogateModel& model, std::size_t step,
                                      std::span<const double> weights);

/// Serial reference: empirical per-component variance of eps - predict_noise
/// over `draws` consecutive sample_step calls on a single stream.
double monte_carlo_error_variance(const SurrogateModel& model, std::size_t step,
                                  std::span<const double> weights, std::size_t draws,
                                  Rng& rng);

/// ||x0||^2 / Var(eps - eps_hat).
double snr(double signal_power, double error_variance);

/// Deterministic DDIM reverse step given the retention at t and t - 1.
std::vector<double> ddim_reverse_step(std::span<const double> x_t,
                                      std::span<const double> eps_hat, double alpha_bar_t,
                                      double alpha_bar_prev);

/// Deterministic DDIM reverse step from schedule index t to t - 1.
std::vector<double> ddim_reverse_step(std::span<const double> x_t,
                                      std::span<const double> eps_hat,
                                      const DiffusionSchedule& schedule, std::size_t t);

}  // namespace blockprobe
