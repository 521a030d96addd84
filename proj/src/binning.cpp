// SPDX-License-Identifier: Apache-2.0

#include "stylo/binning.hpp"

#include <algorithm>
#include <cmath>

#include "stylo/error.hpp"

namespace stylo {

namespace {

struct ValueCount {
  double value;
  std::size_t count;
};

// Greedy count-weighted partition of sorted distinct values into exactly
// `bins` groups (bins <= values.size()). Appends each group's max value.
void partition(std::span<const ValueCount> values, std::size_t bins, std::vector<double>& bounds) {
  if (bins == 0) return;
  std::size_t remaining_rows = 0;
  for (const auto& v : values) remaining_rows += v.count;
  std::size_t i = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    std::size_t remaining_bins = bins - b;
    std::size_t acc = 0;
    // Leave at least one distinct value for every later bin.
    std::size_t last_allowed = values.size() - remaining_bins;
    do {
      acc += values[i].count;
      ++i;
    } while (i <= last_allowed && acc * remaining_bins < remaining_rows);
    if (b + 1 == bins) i = values.size();
    bounds.push_back(values[i - 1].value);
    remaining_rows -= acc;
  }
}

}  // namespace

BinMapper::BinMapper(std::vector<double> upper_bounds) : upper_bounds_(std::move(upper_bounds)) {
  if (upper_bounds_.empty()) throw Error("bin map needs at least one bound");
  for (std::size_t i = 0; i < upper_bounds_.size(); ++i) {
    if (!std::isfinite(upper_bounds_[i])) throw Error("bin bounds must be finite");
    if (i > 0 && !(upper_bounds_[i - 1] < upper_bounds_[i])) throw Error("bin bounds must be strictly ascending");
  }
  zero_bin_ = bin(0.0);
}

std::uint32_t BinMapper::bin(double value) const {
  auto it = std::lower_bound(upper_bounds_.begin(), upper_bounds_.end(), value);
  if (it == upper_bounds_.end()) return static_cast<std::uint32_t>(upper_bounds_.size() - 1);
  return static_cast<std::uint32_t>(it - upper_bounds_.begin());
}

BinMapper BinMapper::fit(std::vector<double> nonzero_values, std::size_t zero_count, std::size_t max_bins) {
  if (max_bins < 2) throw Error("max_bins must be at least 2");
  std::sort(nonzero_values.begin(), nonzero_values.end());
  std::vector<ValueCount> negative, positive;
  for (double v : nonzero_values) {
    if (v == 0.0) {
      ++zero_count;
      continue;
    }
    auto& side = v < 0.0 ? negative : positive;
    if (!side.empty() && side.back().value == v) {
      ++side.back().count;
    } else {
      side.push_back({v, 1});
    }
  }
  if (negative.empty() && positive.empty()) return BinMapper({0.0});

  std::size_t budget = max_bins - (zero_count > 0 ? 1 : 0);
  std::size_t distinct = negative.size() + positive.size();
  std::size_t neg_bins = negative.size();
  std::size_t pos_bins = positive.size();
  if (distinct > budget) {
    neg_bins = negative.empty() ? 0 : std::max<std::size_t>(1, budget * negative.size() / distinct);
    neg_bins = std::min(neg_bins, budget - (positive.empty() ? 0 : 1));
    pos_bins = positive.empty() ? 0 : budget - neg_bins;
    neg_bins = std::min(neg_bins, negative.size());
    pos_bins = std::min(pos_bins, positive.size());
  }

  std::vector<double> bounds;
  partition(negative, neg_bins, bounds);
  if (zero_count > 0) bounds.push_back(0.0);
  partition(positive, pos_bins, bounds);
  return BinMapper(std::move(bounds));
}

std::vector<BinMapper> build_bins(const FeatureMatrix& matrix, std::size_t max_bins) {
  if (matrix.size() == 0) throw Error("cannot bin an empty matrix");
  std::vector<std::vector<double>> columns(matrix.dimension);
  for (const auto& row : matrix.rows) {
    for (std::size_t k = 0; k < row.nnz(); ++k) columns[row.indices[k]].push_back(row.values[k]);
  }
  std::vector<BinMapper> mappers;
  mappers.reserve(matrix.dimension);
  for (auto& col : columns) {
    std::size_t zeros = matrix.size() - col.size();
    mappers.push_back(BinMapper::fit(std::move(col), zeros, max_bins));
  }
  return mappers;
}

BinnedMatrix::BinnedMatrix(const FeatureMatrix& matrix, std::span<const BinMapper> mappers) {
  if (mappers.size() != matrix.dimension) throw Error("bin map count does not match matrix dimension");
  default_bin_.reserve(mappers.size());
  bin_offset_.reserve(mappers.size() + 1);
  bin_offset_.push_back(0);
  for (const auto& m : mappers) {
    default_bin_.push_back(m.zero_bin());
    bin_offset_.push_back(bin_offset_.back() + m.num_bins());
  }
  row_start_.reserve(matrix.size() + 1);
  row_start_.push_back(0);
  for (const auto& row : matrix.rows) {
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      auto f = row.indices[k];
      auto b = mappers[f].bin(row.values[k]);
      if (b == default_bin_[f]) continue;
      features_.push_back(f);
      bins_.push_back(b);
    }
    row_start_.push_back(features_.size());
  }

  col_start_.assign(mappers.size() + 1, 0);
  for (auto f : features_) ++col_start_[f + 1];
  for (std::size_t f = 0; f < mappers.size(); ++f) col_start_[f + 1] += col_start_[f];
  col_rows_.resize(features_.size());
  col_bins_.resize(features_.size());
  std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
  for (std::size_t r = 0; r + 1 < row_start_.size(); ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      auto at = fill[features_[k]]++;
      col_rows_[at] = static_cast<std::uint32_t>(r);
      col_bins_[at] = bins_[k];
    }
  }
}

std::uint32_t BinnedMatrix::bin(std::size_t row, std::size_t feature) const {
  auto feats = row_features(row);
  auto it = std::lower_bound(feats.begin(), feats.end(), static_cast<std::uint32_t>(feature));
  if (it == feats.end() || *it != feature) return default_bin_[feature];
  return bins_[row_start_[row] + static_cast<std::size_t>(it - feats.begin())];
}

}  // namespace stylo
