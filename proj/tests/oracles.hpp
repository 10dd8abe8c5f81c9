#pragma once

// Independent brute-force references used by the tests. None of these share
// code with the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

/// O(m^2) pair count of positions whose relative order differs between a and b.
inline std::size_t discordant_pairs(const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b) {
  std::vector<std::size_t> pos_a(a.size()), pos_b(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) pos_a[a[i]] = i;
  for (std::size_t i = 0; i < b.size(); ++i) pos_b[b[i]] = i;
  std::size_t count = 0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (std::size_t y = x + 1; y < a.size(); ++y) {
      const bool before_a = pos_a[x] < pos_a[y];
      const bool before_b = pos_b[x] < pos_b[y];
      if (before_a != before_b) ++count;
    }
  }
  return count;
}

/// Literal bubble sort of b into a's order, counting adjacent swaps.
inline std::size_t bubble_sort_swaps(const std::vector<std::size_t>& a,
                                     std::vector<std::size_t> b) {
  std::vector<std::size_t> rank(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) rank[a[i]] = i;
  std::size_t swaps = 0;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      if (rank[b[i]] > rank[b[i + 1]]) {
        std::swap(b[i], b[i + 1]);
        ++swaps;
        moved = true;
      }
    }
  }
  return swaps;
}

/// Every permutation of 0..m-1 in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t m) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Set of per-step skip sequences built by nested product over each step's
/// k-subsets of `pools[t]` (indices sorted within a subset).
inline std::set<std::vector<std::vector<std::size_t>>> strategy_product(
    const std::vector<std::vector<std::size_t>>& pools, std::size_t k) {
  std::set<std::vector<std::vector<std::size_t>>> acc{{}};
  for (const auto& pool : pools) {
    std::vector<std::vector<std::size_t>> choices;
    const std::size_t full = std::size_t{1} << pool.size();
    for (std::size_t mask = 0; mask < full; ++mask) {
      std::vector<std::size_t> pick;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (mask & (std::size_t{1} << i)) pick.push_back(pool[i]);
      }
      if (pick.size() != k) continue;
      std::sort(pick.begin(), pick.end());
      choices.push_back(pick);
    }
    std::set<std::vector<std::vector<std::size_t>>> next;
    for (const auto& prefix : acc) {
      for (const auto& c : choices) {
        auto extended = prefix;
        extended.push_back(c);
        next.insert(extended);
      }
    }
    acc = std::move(next);
  }
  return acc;
}

/// Normal-equation least squares for tiny systems via Gaussian elimination.
inline std::vector<double> solve_normal_equations(const std::vector<std::vector<double>>& x,
                                                  const std::vector<double>& y) {
  const std::size_t p = x.empty() ? 0 : x[0].size();
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += x[r][i] * x[r][j];
      a[i][p] += x[r][i] * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) out[i] = a[i][p] / a[i][i];
  return out;
}

}  // namespace oracle
