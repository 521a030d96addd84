// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stylo/binning.hpp"

namespace stylo {

struct TrainParams;

/// Internal nodes route bin <= threshold to `left`; leaves carry `value`.
struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  std::uint32_t threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;
  double weight = 1.0;

  std::size_t num_leaves() const;
  /// Edges on the longest root-to-leaf path (a single leaf has depth 0).
  std::size_t depth() const;

  /// Node index of the leaf reached by a binned training row.
  std::size_t leaf_for(const BinnedMatrix& data, std::size_t row) const;
  /// Node index of the leaf reached by a raw vector.
  std::size_t leaf_for(const SparseVector& x, std::span<const BinMapper> mappers) const;

  bool operator==(const Tree&) const = default;
};

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

struct NodeTotals {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

struct SplitInfo {
  std::uint32_t feature = 0;
  std::uint32_t bin = 0;
  double gain = 0.0;
  NodeTotals left;
  NodeTotals right;
};

/// G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G_P^2/(H_P+l2).
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda_l2);

/// -G/(H+l2); zero when the denominator vanishes.
double leaf_output(double grad, double hess, double lambda_l2);

/// Best split over a flat histogram laid out by `bin_offsets`. Only features
/// flagged in `active` (all when empty) are scanned. Requires gain > min_gain
/// and min_data_in_leaf / min_sum_hessian on both sides; ties go to the lower
/// feature index, then the lower bin.
std::optional<SplitInfo> find_best_split(std::span<const HistBin> hist, std::span<const std::size_t> bin_offsets,
                                         const NodeTotals& totals, const TrainParams& params,
                                         std::span<const std::uint8_t> active = {}, unsigned threads = 1);

/// Leaf-wise (best-first) tree grower. Keeps histogram buffers alive
/// between trees; one learner per training run.
class TreeLearner {
 public:
  TreeLearner(const BinnedMatrix& data, const TrainParams& params, unsigned threads = 1);

  /// See grow_tree.
  Tree grow(std::span<const double> grad, std::span<const double> hess, std::span<const std::uint32_t> rows,
            std::vector<std::uint16_t>* leaf_of_row = nullptr);

 private:
  struct Leaf;
  static constexpr std::uint32_t kUnmarked = ~std::uint32_t{0};

  std::vector<HistBin> take_buffer();
  /// Splits the parent's rows by the split feature's bin via the column index.
  void partition(const Leaf& parent, const SplitInfo& split, Leaf& left, Leaf& right);

  const BinnedMatrix& data_;
  const TrainParams& params_;
  unsigned threads_;
  std::vector<std::vector<HistBin>> pool_;
  std::vector<std::uint32_t> mark_;  // per-row bin scratch for partition()
};

/// Leaf-wise growth over `rows` (sorted ascending). Leaf values are the
/// unshrunk -G/(H+l2). When `leaf_of_row` is given it receives, for every
/// row of `data`, the index of the leaf node that row routes to.
Tree grow_tree(const BinnedMatrix& data, std::span<const double> grad, std::span<const double> hess,
               std::span<const std::uint32_t> rows, const TrainParams& params, unsigned threads = 1,
               std::vector<std::uint16_t>* leaf_of_row = nullptr);

}  // namespace stylo
