#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qphase/rng.hpp"

namespace qphase {

struct SplitSpec {
  double test_fraction = 0.3;
  uint64_t seed = 0;
  bool shuffle = true;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Deterministic train/test partition: |test| = round(test_fraction * n).
// With shuffle, indices are permuted by a seeded Fisher-Yates pass and the
// tail of the permutation becomes the test set; without shuffle the first
// rows train and the tail tests.
inline SplitIndices train_test_split(int n_rows, const SplitSpec& spec) {
  if (n_rows < 2) throw std::invalid_argument("train_test_split: need at least two rows");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: test_fraction must lie in (0, 1)");
  }
  const int n_test = static_cast<int>(std::lround(spec.test_fraction * n_rows));
  if (n_test < 1 || n_test >= n_rows) {
    throw std::invalid_argument("train_test_split: fraction leaves an empty side");
  }

  std::vector<int> order(static_cast<std::size_t>(n_rows));
  std::iota(order.begin(), order.end(), 0);
  if (spec.shuffle) {
    Rng rng(spec.seed);
    for (int i = n_rows - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }

  SplitIndices out;
  out.train.assign(order.begin(), order.end() - n_test);
  out.test.assign(order.end() - n_test, order.end());
  return out;
}

// Uniform sample of `count` distinct row indices out of [0, n), returned in
// ascending order. Requests for count >= n return every index.
inline std::vector<int> sample_row_indices(int n, int count, uint64_t seed) {
  if (n < 1 || count < 1) throw std::invalid_argument("sample_row_indices: need n >= 1, count >= 1");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (count >= n) return order;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace qphase
