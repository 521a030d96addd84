// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stylo/annotation.hpp"
#include "stylo/features.hpp"
#include "stylo/vocabulary.hpp"

namespace stylo {

/// Normalized frequencies; indices strictly increasing, values in (0, 1].
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::size_t dimension = 0;

  std::size_t nnz() const { return indices.size(); }
  /// 0.0 for absent columns.
  double value(std::size_t column) const;

  bool operator==(const SparseVector&) const = default;
};

struct FeatureMatrix {
  std::size_t dimension = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<SparseVector> rows;

  std::size_t size() const { return rows.size(); }
  void add_row(std::string id, int label, SparseVector row);

  bool operator==(const FeatureMatrix&) const = default;
};

/// value = count / per-document total of the key's (class, order) stratum.
/// Keys outside the vocabulary are ignored.
SparseVector vectorize(const FeatureBag& bag, const Vocabulary& vocab);

/// Extracts and vectorizes each document; row order = document order.
FeatureMatrix assemble_matrix(std::span<const AnnotatedDocument> docs, const Vocabulary& vocab,
                              unsigned threads = 1);

/// Header "V<TAB>rows", then "id<TAB>label<TAB>idx:hex,idx:hex,..." per row.
void save_matrix(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix load_matrix(std::istream& in);

}  // namespace stylo
