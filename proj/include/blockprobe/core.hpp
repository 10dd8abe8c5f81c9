#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockprobe/rng.hpp"

namespace blockprobe {

/// Domain error: violated precondition or degenerate input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, detected before any work is done.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dense steps x blocks grid, stored step-major (one contiguous row per step).
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t steps, std::size_t blocks, T fill = T{})
      : steps_(steps), blocks_(blocks), values_(steps * blocks, fill) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t blocks() const noexcept { return blocks_; }

  T& operator()(std::size_t t, std::size_t i) { return values_[t * blocks_ + i]; }
  const T& operator()(std::size_t t, std::size_t i) const {
    return values_[t * blocks_ + i];
  }

  std::span<T> row(std::size_t t) { return {values_.data() + t * blocks_, blocks_}; }
  std::span<const T> row(std::size_t t) const {
    return {values_.data() + t * blocks_, blocks_};
  }

  const std::vector<T>& data() const noexcept { return values_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t steps_ = 0;
  std::size_t blocks_ = 0;
  std::vector<T> values_;
};

namespace detail {

/// Grid whose entries are confined to [0, 1]. Tag distinguishes weights from
/// thresholds at the type level.
template <class Tag>
class UnitGrid {
 public:
  UnitGrid() = default;
  UnitGrid(std::size_t steps, std::size_t blocks, double fill = 0.0);
  explicit UnitGrid(Grid<double> values);

  std::size_t steps() const noexcept { return grid_.steps(); }
  std::size_t blocks() const noexcept { return grid_.blocks(); }
  double operator()(std::size_t t, std::size_t i) const { return grid_(t, i); }
  std::span<const double> row(std::size_t t) const { return grid_.row(t); }
  void set_row(std::size_t t, std::span<const double> values);
  const Grid<double>& grid() const noexcept { return grid_; }

  bool operator==(const UnitGrid&) const = default;

 private:
  Grid<double> grid_;
};

struct WeightTag {};
struct ThresholdTag {};

}  // namespace detail

/// Probe-internal per-step block weights, each in [0, 1].
using WeightMatrix = detail::UnitGrid<detail::WeightTag>;
/// Per-step block skip thresholds, each in [0, 1].
using ThresholdMatrix = detail::UnitGrid<detail::ThresholdTag>;

/// A permutation of the block indices 0..m-1.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> order);

  static Permutation identity(std::size_t m);

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t operator[](std::size_t i) const { return order_[i]; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  /// Position of each block index within the order.
  std::vector<std::size_t> positions() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> order_;
};

/// One permutation per inference step, all over the same m.
class RankingSequence {
 public:
  RankingSequence() = default;
  explicit RankingSequence(std::vector<Permutation> per_step);

  std::size_t steps() const noexcept { return per_step_.size(); }
  std::size_t blocks() const noexcept {
    return per_step_.empty() ? 0 : per_step_.front().size();
  }
  const Permutation& operator[](std::size_t t) const { return per_step_[t]; }
  const std::vector<Permutation>& per_step() const noexcept { return per_step_; }

  bool operator==(const RankingSequence&) const = default;

 private:
  std::vector<Permutation> per_step_;
};

enum class ScoreKind { voting, importance, inverted_importance };

const char* to_string(ScoreKind kind) noexcept;

/// Voting scores (integral values), importance scores in [1/m, 1], or inverted
/// importance scores in [0, 1 - 1/m]; `runs` is the number of probe runs voted.
struct ScoreMatrix {
  ScoreKind kind = ScoreKind::voting;
  std::size_t runs = 0;
  Grid<double> values;

  bool operator==(const ScoreMatrix&) const = default;
};

/// Default tie-break perturbation scale for argsort_with_jitter.
inline constexpr double kDefaultJitterScale = 1e-9;

/// Indices sorting values + U[0, jitter_scale] in non-decreasing order.
Permutation argsort_with_jitter(std::span<const double> values, double jitter_scale,
                                Rng& rng);

/// Minimum number of adjacent transpositions turning `a` into `b`.
std::size_t bubble_sort_distance(const Permutation& a, const Permutation& b);

/// Sum of per-step bubble-sort distances.
std::size_t ranking_sequence_distance(const RankingSequence& a, const RankingSequence& b);

/// E(w) = sum of squared weights.
double energy(std::span<const double> weights) noexcept;

/// E0 / E(w) + (1/m) * #{i : w_i < q_i}.
double fitness(std::span<const double> weights, std::span<const double> thresholds,
               double initial_energy);

}  // namespace blockprobe
