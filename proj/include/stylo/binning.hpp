// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stylo/vectorizer.hpp"

namespace stylo {

/// Ascending bin upper bounds for one feature. A value maps to the first
/// bin whose upper bound is >= the value (the last bin if none is).
class BinMapper {
 public:
  BinMapper() : BinMapper(std::vector<double>{0.0}) {}
  /// Throws unless bounds are non-empty, strictly ascending and finite.
  explicit BinMapper(std::vector<double> upper_bounds);

  /// Quantile partition of the observed values. Zero gets a dedicated bin
  /// whenever zero_count > 0; at most max_bins bins overall.
  static BinMapper fit(std::vector<double> nonzero_values, std::size_t zero_count, std::size_t max_bins);

  std::uint32_t bin(double value) const;
  std::uint32_t zero_bin() const { return zero_bin_; }
  std::size_t num_bins() const { return upper_bounds_.size(); }
  const std::vector<double>& upper_bounds() const { return upper_bounds_; }

  bool operator==(const BinMapper& other) const { return upper_bounds_ == other.upper_bounds_; }

 private:
  std::vector<double> upper_bounds_;
  std::uint32_t zero_bin_ = 0;
};

/// One mapper per matrix column.
std::vector<BinMapper> build_bins(const FeatureMatrix& matrix, std::size_t max_bins);

/// Row-major binned copy of a feature matrix. Only cells whose bin differs
/// from the column's zero bin are stored.
class BinnedMatrix {
 public:
  BinnedMatrix(const FeatureMatrix& matrix, std::span<const BinMapper> mappers);

  std::size_t num_rows() const { return row_start_.size() - 1; }
  std::size_t num_features() const { return default_bin_.size(); }

  /// Offset of each feature's first bin in a flat histogram; back() = total bins.
  const std::vector<std::size_t>& bin_offsets() const { return bin_offset_; }
  std::size_t total_bins() const { return bin_offset_.back(); }
  std::uint32_t default_bin(std::size_t feature) const { return default_bin_[feature]; }

  std::span<const std::uint32_t> row_features(std::size_t row) const {
    return {features_.data() + row_start_[row], row_start_[row + 1] - row_start_[row]};
  }
  std::span<const std::uint32_t> row_bins(std::size_t row) const {
    return {bins_.data() + row_start_[row], row_start_[row + 1] - row_start_[row]};
  }
  std::uint32_t bin(std::size_t row, std::size_t feature) const;

  /// Column view of the same cells: rows (ascending) and bins of `feature`.
  std::span<const std::uint32_t> column_rows(std::size_t feature) const {
    return {col_rows_.data() + col_start_[feature], col_start_[feature + 1] - col_start_[feature]};
  }
  std::span<const std::uint32_t> column_bins(std::size_t feature) const {
    return {col_bins_.data() + col_start_[feature], col_start_[feature + 1] - col_start_[feature]};
  }

 private:
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> features_;
  std::vector<std::uint32_t> bins_;
  std::vector<std::uint32_t> default_bin_;
  std::vector<std::size_t> bin_offset_;
  std::vector<std::size_t> col_start_;
  std::vector<std::uint32_t> col_rows_;
  std::vector<std::uint32_t> col_bins_;
};

}  // namespace stylo
