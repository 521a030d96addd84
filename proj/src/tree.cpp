// SPDX-License-Identifier: Apache-2.0

#include "stylo/tree.hpp"

#include <algorithm>
#include <limits>

#include "stylo/error.hpp"
#include "stylo/gbdt.hpp"
#include "stylo/parallel.hpp"

namespace stylo {

namespace {

// Features scanned per parallel work item.
constexpr std::size_t kScanChunk = 256;

}  // namespace

struct TreeLearner::Leaf {
  std::int32_t node = 0;
  std::size_t depth = 0;
  std::vector<std::uint32_t> rows;    // rows fitted by this tree
  std::vector<std::uint32_t> others;  // remaining rows, tracked only to report their leaf
  NodeTotals totals;
  std::vector<HistBin> hist;
  std::vector<std::uint8_t> active;
  std::optional<SplitInfo> best;
};

namespace {

NodeTotals sum_rows(std::span<const std::uint32_t> rows, std::span<const double> grad, std::span<const double> hess) {
  NodeTotals t;
  for (auto r : rows) {
    t.grad += grad[r];
    t.hess += hess[r];
  }
  t.count = rows.size();
  return t;
}

// Any split of a feature leaves its non-default cells alone on one side, so
// a feature with fewer than min_data non-default rows in a node can never
// split it, nor any node below it. Such features are left out of `active`.

// Accumulates the non-default cells of `rows` for the features flagged in
// `scope` (whose histogram ranges must already be zero), then fills each
// scoped feature's default bin from the leaf totals.
void build_hist(const BinnedMatrix& data, std::span<const double> grad, std::span<const double> hess,
                std::span<const std::uint32_t> rows, const NodeTotals& totals, std::span<const std::uint8_t> scope,
                std::size_t min_data, std::vector<HistBin>& hist, std::vector<std::uint8_t>& active) {
  const auto& off = data.bin_offsets();
  for (auto r : rows) {
    auto feats = data.row_features(r);
    auto bins = data.row_bins(r);
    const double g = grad[r];
    const double h = hess[r];
    for (std::size_t k = 0; k < feats.size(); ++k) {
      if (!scope[feats[k]]) continue;
      auto& cell = hist[off[feats[k]] + bins[k]];
      cell.grad += g;
      cell.hess += h;
      cell.count += 1;
    }
  }
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    active[f] = 0;
    if (!scope[f]) continue;
    HistBin rest;
    for (std::size_t b = off[f]; b < off[f + 1]; ++b) {
      rest.grad += hist[b].grad;
      rest.hess += hist[b].hess;
      rest.count += hist[b].count;
    }
    auto& def = hist[off[f] + data.default_bin(f)];
    def.grad = totals.grad - rest.grad;
    def.hess = totals.hess - rest.hess;
    def.count = static_cast<std::uint32_t>(totals.count - rest.count);
    active[f] = rest.count >= min_data;
  }
}

void zero_scope(const BinnedMatrix& data, std::span<const std::uint8_t> scope, std::vector<HistBin>& hist) {
  const auto& off = data.bin_offsets();
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    if (scope[f]) std::fill(hist.begin() + static_cast<std::ptrdiff_t>(off[f]),
                            hist.begin() + static_cast<std::ptrdiff_t>(off[f + 1]), HistBin{});
  }
}

// parent -= child over the parent's active features, then refreshes `active`
// for the result.
void subtract_hist(const BinnedMatrix& data, std::vector<HistBin>& parent, const std::vector<HistBin>& child,
                   std::size_t min_data, std::vector<std::uint8_t>& active) {
  const auto& off = data.bin_offsets();
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    if (!active[f]) continue;
    std::uint32_t outside_default = 0;
    const std::size_t def = off[f] + data.default_bin(f);
    for (std::size_t b = off[f]; b < off[f + 1]; ++b) {
      parent[b].grad -= child[b].grad;
      parent[b].hess -= child[b].hess;
      parent[b].count -= child[b].count;
      if (b != def) outside_default += parent[b].count;
    }
    active[f] = outside_default >= min_data;
  }
}

}  // namespace

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[n].is_leaf()) {
      stack.push_back({nodes[n].left, d + 1});
      stack.push_back({nodes[n].right, d + 1});
    }
  }
  return best;
}

std::size_t Tree::leaf_for(const BinnedMatrix& data, std::size_t row) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf()) {
    const auto& node = nodes[n];
    n = static_cast<std::size_t>(data.bin(row, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left
                                                                                                        : node.right);
  }
  return n;
}

std::size_t Tree::leaf_for(const SparseVector& x, std::span<const BinMapper> mappers) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf()) {
    const auto& node = nodes[n];
    auto f = static_cast<std::size_t>(node.feature);
    n = static_cast<std::size_t>(mappers[f].bin(x.value(f)) <= node.threshold ? node.left : node.right);
  }
  return n;
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda_l2) {
  double gp = grad_left + grad_right;
  double hp = hess_left + hess_right;
  return grad_left * grad_left / (hess_left + lambda_l2) + grad_right * grad_right / (hess_right + lambda_l2) -
         gp * gp / (hp + lambda_l2);
}

double leaf_output(double grad, double hess, double lambda_l2) {
  double denom = hess + lambda_l2;
  return denom > 0.0 ? -grad / denom : 0.0;
}

std::optional<SplitInfo> find_best_split(std::span<const HistBin> hist, std::span<const std::size_t> bin_offsets,
                                         const NodeTotals& totals, const TrainParams& params,
                                         std::span<const std::uint8_t> active, unsigned threads) {
  const std::size_t num_features = bin_offsets.size() - 1;
  const std::size_t min_data = static_cast<std::size_t>(std::max(params.min_data_in_leaf, 1));
  const double parent_term = totals.grad * totals.grad / (totals.hess + params.lambda_l2);

  auto scan = [&](std::size_t f_begin, std::size_t f_end) {
    std::optional<SplitInfo> best;
    for (std::size_t f = f_begin; f < f_end; ++f) {
      if (!active.empty() && !active[f]) continue;
      const std::size_t first = bin_offsets[f];
      const std::size_t nb = bin_offsets[f + 1] - first;
      NodeTotals left;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        const auto& cell = hist[first + b];
        // an empty bin moves no rows, so it cannot beat the split just before it
        if (cell.count == 0) continue;
        left.grad += cell.grad;
        left.hess += cell.hess;
        left.count += cell.count;
        if (left.count < min_data) continue;
        const std::size_t right_count = totals.count - left.count;
        if (right_count < min_data) break;
        const double right_grad = totals.grad - left.grad;
        const double right_hess = totals.hess - left.hess;
        if (left.hess < params.min_sum_hessian || right_hess < params.min_sum_hessian) continue;
        double gain = left.grad * left.grad / (left.hess + params.lambda_l2) +
                      right_grad * right_grad / (right_hess + params.lambda_l2) - parent_term;
        if (!(gain > params.min_gain)) continue;
        if (!best || gain > best->gain) {
          best = SplitInfo{static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(b), gain, left,
                           NodeTotals{right_grad, right_hess, right_count}};
        }
      }
    }
    return best;
  };

  const std::size_t chunks = (num_features + kScanChunk - 1) / kScanChunk;
  if (threads == 1 || chunks <= 1) return scan(0, num_features);

  std::vector<std::optional<SplitInfo>> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    partial[c] = scan(c * kScanChunk, std::min(num_features, (c + 1) * kScanChunk));
  });
  std::optional<SplitInfo> best;
  for (auto& p : partial) {
    if (p && (!best || p->gain > best->gain)) best = p;
  }
  return best;
}

TreeLearner::TreeLearner(const BinnedMatrix& data, const TrainParams& params, unsigned threads)
    : data_(data), params_(params), threads_(threads), mark_(data.num_rows(), kUnmarked) {}

void TreeLearner::partition(const Leaf& parent, const SplitInfo& split, Leaf& left, Leaf& right) {
  auto col_rows = data_.column_rows(split.feature);
  auto col_bins = data_.column_bins(split.feature);
  for (std::size_t k = 0; k < col_rows.size(); ++k) mark_[col_rows[k]] = col_bins[k];
  const std::uint32_t def = data_.default_bin(split.feature);
  auto goes_left = [&](std::uint32_t r) { return (mark_[r] == kUnmarked ? def : mark_[r]) <= split.bin; };
  for (auto r : parent.rows) (goes_left(r) ? left.rows : right.rows).push_back(r);
  for (auto r : parent.others) (goes_left(r) ? left.others : right.others).push_back(r);
  for (auto r : col_rows) mark_[r] = kUnmarked;
}

std::vector<HistBin> TreeLearner::take_buffer() {
  if (pool_.empty()) return std::vector<HistBin>(data_.total_bins());
  auto buf = std::move(pool_.back());
  pool_.pop_back();
  return buf;
}

Tree TreeLearner::grow(std::span<const double> grad, std::span<const double> hess, std::span<const std::uint32_t> rows,
                       std::vector<std::uint16_t>* leaf_of_row) {
  const BinnedMatrix& data = data_;
  const TrainParams& params = params_;
  const unsigned threads = threads_;
  auto& pool = pool_;
  if (rows.empty()) throw Error("grow_tree needs at least one row");
  const std::size_t num_features = data.num_features();
  const std::size_t min_data = static_cast<std::size_t>(std::max(params.min_data_in_leaf, 1));
  const auto max_leaves = static_cast<std::size_t>(params.num_leaves);

  auto can_split = [&](const Leaf& leaf) {
    return leaf.rows.size() >= 2 * min_data && (params.max_depth <= 0 || leaf.depth < static_cast<std::size_t>(params.max_depth));
  };
  auto evaluate = [&](Leaf& leaf) {
    leaf.best.reset();
    if (can_split(leaf)) {
      leaf.best = find_best_split(leaf.hist, data.bin_offsets(), leaf.totals, params, leaf.active, threads);
    }
    if (!leaf.best && !leaf.hist.empty()) pool.push_back(std::move(leaf.hist));  // never split again
  };

  Tree tree;
  tree.nodes.push_back(TreeNode{});
  std::vector<Leaf> leaves(1);
  {
    Leaf& root = leaves[0];
    root.rows.assign(rows.begin(), rows.end());
    if (leaf_of_row && rows.size() < data.num_rows()) {
      std::size_t next = 0;
      for (std::uint32_t r = 0; r < data.num_rows(); ++r) {
        if (next < rows.size() && rows[next] == r) {
          ++next;
        } else {
          root.others.push_back(r);
        }
      }
    }
    root.totals = sum_rows(root.rows, grad, hess);
    if (can_split(root)) {
      std::vector<std::uint8_t> scope(num_features, 1);
      root.hist = take_buffer();
      std::fill(root.hist.begin(), root.hist.end(), HistBin{});
      root.active.assign(num_features, 0);
      build_hist(data, grad, hess, root.rows, root.totals, scope, min_data, root.hist, root.active);
    }
    evaluate(root);
  }

  while (leaves.size() < max_leaves) {
    std::size_t pick = leaves.size();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].best && (pick == leaves.size() || leaves[i].best->gain > leaves[pick].best->gain)) pick = i;
    }
    if (pick == leaves.size()) break;

    Leaf parent = std::move(leaves[pick]);
    const SplitInfo split = *parent.best;

    Leaf left, right;
    left.depth = right.depth = parent.depth + 1;
    partition(parent, split, left, right);
    left.totals = sum_rows(left.rows, grad, hess);
    right.totals = sum_rows(right.rows, grad, hess);

    auto& pnode = tree.nodes[static_cast<std::size_t>(parent.node)];
    pnode.feature = static_cast<std::int32_t>(split.feature);
    pnode.threshold = split.bin;
    pnode.left = static_cast<std::int32_t>(tree.nodes.size());
    pnode.right = static_cast<std::int32_t>(tree.nodes.size() + 1);
    left.node = pnode.left;
    right.node = pnode.right;
    tree.nodes.push_back(TreeNode{});
    tree.nodes.push_back(TreeNode{});

    // Histograms are only needed where a further split is possible.
    bool need_left = can_split(left);
    bool need_right = can_split(right);
    if (need_left || need_right) {
      Leaf& small = left.rows.size() <= right.rows.size() ? left : right;
      Leaf& large = &small == &left ? right : left;
      small.hist = take_buffer();
      zero_scope(data, parent.active, small.hist);
      small.active.assign(num_features, 0);
      build_hist(data, grad, hess, small.rows, small.totals, parent.active, min_data, small.hist, small.active);
      large.hist = std::move(parent.hist);
      large.active = std::move(parent.active);
      subtract_hist(data, large.hist, small.hist, min_data, large.active);
    } else if (!parent.hist.empty()) {
      pool.push_back(std::move(parent.hist));
    }
    evaluate(left);
    evaluate(right);

    leaves[pick] = std::move(left);
    leaves.push_back(std::move(right));
  }

  for (const auto& leaf : leaves) {
    tree.nodes[static_cast<std::size_t>(leaf.node)].value =
        leaf_output(leaf.totals.grad, leaf.totals.hess, params.lambda_l2);
  }

  for (auto& leaf : leaves) {
    if (!leaf.hist.empty()) pool.push_back(std::move(leaf.hist));
  }

  if (leaf_of_row) {
    leaf_of_row->assign(data.num_rows(), 0);
    for (const auto& leaf : leaves) {
      auto node = static_cast<std::uint16_t>(leaf.node);
      for (auto r : leaf.rows) (*leaf_of_row)[r] = node;
      for (auto r : leaf.others) (*leaf_of_row)[r] = node;
    }
  }
  return tree;
}

Tree grow_tree(const BinnedMatrix& data, std::span<const double> grad, std::span<const double> hess,
               std::span<const std::uint32_t> rows, const TrainParams& params, unsigned threads,
               std::vector<std::uint16_t>* leaf_of_row) {
  TreeLearner learner(data, params, threads);
  return learner.grow(grad, hess, rows, leaf_of_row);
}

}  // namespace stylo
