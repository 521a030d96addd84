// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stylo/gbdt.hpp"
#include "stylo/vectorizer.hpp"

namespace stylo {

struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> fold_of;  // per row

  std::vector<std::uint32_t> rows_in(std::size_t fold) const;
  std::vector<std::uint32_t> rows_outside(std::size_t fold) const;

  bool operator==(const FoldAssignment&) const = default;
};

/// Seeded shuffle within each class, then one round-robin over the folds that
/// continues from class 0 into class 1. Throws if a class has fewer than k rows.
FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// One ensemble per fold, each trained on the rows outside its fold.
struct CvModel {
  FoldAssignment folds;
  std::vector<GbdtEnsemble> models;

  /// Fold 0's probability.
  double predict_single(const SparseVector& x) const;
  /// Arithmetic mean of every fold model's probability.
  double predict_averaged(const SparseVector& x) const;
  /// Row i scored by the model that never saw it.
  std::vector<double> out_of_fold(const FeatureMatrix& m) const;
};

/// Fold f trains with seed mix_seed(seed, f). Folds run concurrently when
/// threads != 1; results do not depend on the thread count.
CvModel train_cv(const FeatureMatrix& matrix, const TrainParams& params, std::size_t k, std::uint64_t seed,
                 unsigned threads = 1);

/// Rows at the given positions, in order.
FeatureMatrix select_rows(const FeatureMatrix& matrix, std::span<const std::uint32_t> rows);

/// fold_<i>.txt model files plus manifest.json (k, seed, fold assignment).
void save_cv_model(const CvModel& model, const std::filesystem::path& dir);
CvModel load_cv_model(const std::filesystem::path& dir);

}  // namespace stylo
