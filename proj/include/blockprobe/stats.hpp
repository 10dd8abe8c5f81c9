#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace blockprobe {

/// Per-component running mean and M2 (Welford), mergeable across chunks
/// (Chan et al. pairwise update).
class ComponentMoments {
 public:
  explicit ComponentMoments(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t c = 0; c < mean_.size(); ++c) {
      const double delta = x[c] - mean_[c];
      mean_[c] += delta * inv;
      m2_[c] += delta * (x[c] - mean_[c]);
    }
  }

  void merge(const ComponentMoments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t c = 0; c < mean_.size(); ++c) {
      const double delta = other.mean_[c] - mean_[c];
      mean_[c] += delta * nb / n;
      m2_[c] += other.m2_[c] + delta * delta * na * nb / n;
    }
    count_ += other.count_;
  }

  std::size_t count() const noexcept { return count_; }

  /// Unbiased per-component variance averaged over components; 0 for < 2 draws.
  double mean_variance() const {
    if (count_ < 2 || m2_.empty()) return 0.0;
    double total = 0.0;
    for (double v : m2_) total += v;
    return total / static_cast<double>(m2_.size()) / static_cast<double>(count_ - 1);
  }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace blockprobe
