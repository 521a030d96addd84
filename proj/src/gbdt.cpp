// SPDX-License-Identifier: Apache-2.0

#include "stylo/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stylo/error.hpp"
#include "stylo/parallel.hpp"

namespace stylo {

namespace {

// Leaf node indices are stored per training row as uint16.
constexpr int kMaxLeaves = 1 << 14;

}  // namespace

void TrainParams::validate() const {
  auto fail = [](const std::string& what) { throw Error("invalid training parameter: " + what); };
  if (num_leaves < 2 || num_leaves > kMaxLeaves) fail("num_leaves must lie in [2, 16384]");
  if (num_iterations < 0) fail("num_iterations must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) fail("bagging_fraction must lie in (0, 1]");
  if (bagging_freq < 0) fail("bagging_freq must be >= 0");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) fail("drop_rate must lie in [0, 1)");
  if (max_bins < 2) fail("max_bins must be >= 2");
  if (min_data_in_leaf < 1) fail("min_data_in_leaf must be >= 1");
  if (!(lambda_l2 >= 0.0)) fail("lambda_l2 must be >= 0");
  if (!(min_gain >= 0.0)) fail("min_gain must be >= 0");
  if (!(min_sum_hessian >= 0.0)) fail("min_sum_hessian must be >= 0");
}

std::optional<TrainParams> preset_params(std::string_view name) {
  TrainParams p;
  if (name == "small") {
    p.num_leaves = 10, p.num_iterations = 100, p.max_depth = 8;
  } else if (name == "medium") {
    p.num_leaves = 12, p.num_iterations = 500, p.max_depth = 10;
  } else if (name == "big" || name == "culled") {
    p.num_leaves = 20, p.num_iterations = 1500, p.max_depth = 12;
  } else {
    return std::nullopt;
  }
  return p;
}

std::vector<std::string> preset_names() { return {"small", "medium", "big", "culled"}; }

double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  double e = std::exp(raw);
  return e / (1.0 + e);
}

GradHess logistic_grad_hess(double raw, int label) {
  double p = sigmoid(raw);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

void logistic_grad_hess(std::span<const double> raw, std::span<const int> labels, std::span<double> grad,
                        std::span<double> hess) {
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto gh = logistic_grad_hess(raw[i], labels[i]);
    grad[i] = gh.grad;
    hess[i] = gh.hess;
  }
}

double log_loss(std::span<const double> raw, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // softplus(raw) - y * raw, written to avoid overflow
    double x = raw[i];
    total += std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - labels[i] * x;
  }
  return raw.empty() ? 0.0 : total / static_cast<double>(raw.size());
}

double GbdtEnsemble::predict_raw(const SparseVector& x) const {
  if (x.dimension != num_features()) {
    throw Error("input dimension " + std::to_string(x.dimension) + " does not match model dimension " +
                std::to_string(num_features()));
  }
  double raw = base_score;
  for (const auto& tree : trees) raw += tree.weight * tree.nodes[tree.leaf_for(x, bins)].value;
  return raw;
}

std::vector<double> GbdtEnsemble::predict_proba(const FeatureMatrix& m, unsigned threads) const {
  std::vector<double> out(m.size());
  parallel_for(m.size(), threads, [&](std::size_t i) { out[i] = predict_proba(m.rows[i]); });
  return out;
}

double apply_dart_normalization(std::vector<Tree>& trees, std::span<const std::size_t> dropped) {
  if (dropped.empty()) return 1.0;
  const double k = static_cast<double>(dropped.size());
  for (auto t : dropped) trees[t].weight *= k / (k + 1.0);
  return 1.0 / (k + 1.0);
}

std::vector<std::uint32_t> draw_bag(std::size_t n, double fraction, Rng& rng) {
  auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  want = std::min(std::max<std::size_t>(want, 1), n);
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  if (want < n) {
    // partial Fisher-Yates: the first `want` slots become the sample
    for (std::size_t i = 0; i < want; ++i) {
      auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(rows[i], rows[j]);
    }
    rows.resize(want);
    std::sort(rows.begin(), rows.end());
  }
  return rows;
}

GbdtEnsemble train(const FeatureMatrix& matrix, const TrainParams& params, const TrainOptions& options) {
  return train(matrix, matrix.labels, params, options);
}

GbdtEnsemble train(const FeatureMatrix& matrix, std::span<const int> labels, const TrainParams& params,
                   const TrainOptions& options) {
  params.validate();
  const std::size_t n = matrix.size();
  if (labels.size() != n) throw Error("label count does not match row count");
  if (n < 2) throw Error("training needs at least two rows");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == n) throw Error("training labels contain a single class");

  GbdtEnsemble model;
  model.params = params;
  model.bins = build_bins(matrix, static_cast<std::size_t>(params.max_bins));
  const double mean = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(mean / (1.0 - mean));

  const BinnedMatrix data(matrix, model.bins);
  TreeLearner learner(data, params, options.threads);
  Rng rng(params.seed);

  std::vector<double> score(n, model.base_score);
  std::vector<double> raw(n), dropped_sum(n), grad(n), hess(n);
  // Leaf node reached by each row, per tree; lets DART recompute tree
  // contributions without re-routing.
  std::vector<std::vector<std::uint16_t>> leaf_of;
  std::vector<std::uint32_t> bag(n);
  std::iota(bag.begin(), bag.end(), 0u);
  const bool bagging = params.bagging_freq > 0 && params.bagging_fraction < 1.0;
  std::vector<std::size_t> dropped;

  for (int it = 0; it < params.num_iterations; ++it) {
    if (bagging && it % params.bagging_freq == 0) bag = draw_bag(n, params.bagging_fraction, rng);

    dropped.clear();
    if (params.drop_rate > 0.0) {
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        if (rng.uniform() < params.drop_rate) dropped.push_back(t);
      }
    }

    if (dropped.empty()) {
      raw = score;
    } else {
      parallel_for(n, options.threads, [&](std::size_t r) {
        double d = 0.0;
        for (auto t : dropped) d += model.trees[t].weight * model.trees[t].nodes[leaf_of[t][r]].value;
        dropped_sum[r] = d;
        raw[r] = score[r] - d;
      });
    }
    logistic_grad_hess(raw, labels, grad, hess);

    std::vector<std::uint16_t> leaves;
    Tree tree = learner.grow(grad, hess, bag, &leaves);
    for (auto& node : tree.nodes) {
      if (node.is_leaf()) node.value *= params.learning_rate;
    }
    tree.weight = apply_dart_normalization(model.trees, dropped);

    if (dropped.empty()) {
      for (std::size_t r = 0; r < n; ++r) score[r] += tree.nodes[leaves[r]].value;
    } else {
      const double k = static_cast<double>(dropped.size());
      const double keep = k / (k + 1.0);
      for (std::size_t r = 0; r < n; ++r) {
        score[r] = raw[r] + keep * dropped_sum[r] + tree.weight * tree.nodes[leaves[r]].value;
      }
    }
    model.trees.push_back(std::move(tree));
    leaf_of.push_back(std::move(leaves));

    if (options.loss_trace) options.loss_trace->push_back(log_loss(score, labels));
  }
  return model;
}

}  // namespace stylo
