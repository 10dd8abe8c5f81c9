#include "blockprobe/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockprobe {
namespace detail {

namespace {

void check_unit(std::span<const double> values) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error("grid entry outside [0, 1]: " + std::to_string(v));
    }
  }
}

}  // namespace

template <class Tag>
UnitGrid<Tag>::UnitGrid(std::size_t steps, std::size_t blocks, double fill)
    : UnitGrid(Grid<double>(steps, blocks, fill)) {}

template <class Tag>
UnitGrid<Tag>::UnitGrid(Grid<double> values) : grid_(std::move(values)) {
  if (grid_.steps() == 0 || grid_.blocks() == 0) {
    throw Error("grid needs at least one step and one block");
  }
  check_unit(grid_.data());
}

template <class Tag>
void UnitGrid<Tag>::set_row(std::size_t t, std::span<const double> values) {
  if (t >= steps() || values.size() != blocks()) {
    throw Error("row shape mismatch");
  }
  check_unit(values);
  std::ranges::copy(values, grid_.row(t).begin());
}

template class UnitGrid<WeightTag>;
template class UnitGrid<ThresholdTag>;

}  // namespace detail

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
  std::vector<bool> seen(order_.size(), false);
  for (std::size_t v : order_) {
    if (v >= order_.size() || seen[v]) {
      throw Error("not a permutation of 0..m-1");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t m) {
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return Permutation(std::move(order));
}

std::vector<std::size_t> Permutation::positions() const {
  std::vector<std::size_t> pos(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) pos[order_[i]] = i;
  return pos;
}

RankingSequence::RankingSequence(std::vector<Permutation> per_step)
    : per_step_(std::move(per_step)) {
  for (const auto& p : per_step_) {
    if (p.size() != per_step_.front().size()) {
      throw Error("ranking sequence mixes permutation sizes");
    }
  }
}

const char* to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::voting: return "voting";
    case ScoreKind::importance: return "importance";
    case ScoreKind::inverted_importance: return "inverted-importance";
  }
  return "unknown";
}

Permutation argsort_with_jitter(std::span<const double> values, double jitter_scale,
                                Rng& rng) {
  if (values.empty()) throw Error("empty value list");
  if (!(jitter_scale >= 0.0)) throw Error("jitter scale must be non-negative");

  std::vector<double> keyed(values.begin(), values.end());
  if (jitter_scale > 0.0) {
    std::uniform_real_distribution<double> jitter(0.0, jitter_scale);
    for (double& v : keyed) v += jitter(rng);
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable so that exact ties (jitter 0) keep index order.
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return keyed[a] < keyed[b];
  });
  return Permutation(std::move(order));
}

namespace {

// Inversion count by merge sort, O(m log m).
std::size_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& buf,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

std::size_t bubble_sort_distance(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw Error("permutation lengths differ");
  // Relabel b by positions in a; the inversions of the relabelled sequence
  // are the adjacent swaps needed.
  const auto pos_a = a.positions();
  std::vector<std::size_t> seq(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) seq[i] = pos_a[b[i]];
  std::vector<std::size_t> buf(seq.size());
  return count_inversions(seq, buf, 0, seq.size());
}

std::size_t ranking_sequence_distance(const RankingSequence& a, const RankingSequence& b) {
  if (a.steps() != b.steps() || a.blocks() != b.blocks()) {
    throw Error("ranking sequence shapes differ");
  }
  std::size_t total = 0;
  for (std::size_t t = 0; t < a.steps(); ++t) total += bubble_sort_distance(a[t], b[t]);
  return total;
}

double energy(std::span<const double> weights) noexcept {
  return std::transform_reduce(weights.begin(), weights.end(), 0.0, std::plus<>{},
                               [](double w) { return w * w; });
}

double fitness(std::span<const double> weights, std::span<const double> thresholds,
               double initial_energy) {
  if (weights.size() != thresholds.size() || weights.empty()) {
    throw Error("weights and thresholds must share a non-zero length");
  }
  const double e = energy(weights);
  if (!(e > 0.0)) throw Error("degenerate weight set");
  if (!(initial_energy > 0.0)) throw Error("initial energy must be positive");
  std::size_t below = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < thresholds[i]) ++below;
  }
  return initial_energy / e + static_cast<double>(below) / static_cast<double>(weights.size());
}

}  // namespace blockprobe
