// SPDX-License-Identifier: Apache-2.0
// Synthetic data sets shared by unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "stylo/random.hpp"
#include "stylo/vectorizer.hpp"

namespace stylo::testing {

inline double gaussian(Rng& rng) {
  // Box-Muller on the library generator keeps draws platform-independent.
  double u1 = 1.0 - rng.uniform();
  double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Dense rows stored sparsely. Class 1 is shifted by `shift` on every feature.
inline FeatureMatrix gaussian_blobs(std::size_t rows, std::size_t dims, double shift, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.dimension = dims;
  for (std::size_t i = 0; i < rows; ++i) {
    int label = static_cast<int>(i % 2);
    SparseVector v;
    v.dimension = dims;
    for (std::size_t d = 0; d < dims; ++d) {
      double x = gaussian(rng) + (label ? shift : 0.0);
      if (x == 0.0) continue;
      v.indices.push_back(static_cast<std::uint32_t>(d));
      v.values.push_back(x);
    }
    m.add_row("g" + std::to_string(i), label, std::move(v));
  }
  return m;
}

/// Random sparse matrix whose label depends on a handful of columns.
inline FeatureMatrix sparse_random(std::size_t rows, std::size_t dims, double density, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.dimension = dims;
  auto per_row = static_cast<std::size_t>(std::llround(density * static_cast<double>(dims)));
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::uint32_t> cols;
    while (cols.size() < per_row) {
      auto c = static_cast<std::uint32_t>(rng.below(dims));
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
    std::sort(cols.begin(), cols.end());
    SparseVector v;
    v.dimension = dims;
    double signal = 0.0;
    for (auto c : cols) {
      double x = (1.0 + static_cast<double>(rng.below(40))) / 64.0;
      v.indices.push_back(c);
      v.values.push_back(x);
      if (c % 7 == 0) signal += x;
      if (c % 11 == 0) signal -= x;
    }
    int label = signal + 0.1 * (rng.uniform() - 0.5) > 0.0 ? 1 : 0;
    m.add_row("s" + std::to_string(i), label, std::move(v));
  }
  return m;
}

}  // namespace stylo::testing
