// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/binning.hpp"
#include "stylo/random.hpp"
#include "stylo/tree.hpp"
#include "stylo/vectorizer.hpp"

namespace stylo {

struct TrainParams {
  int num_leaves = 10;
  int num_iterations = 100;
  int max_depth = 8;  // <= 0 means unlimited
  double learning_rate = 0.5;
  double bagging_fraction = 0.8;
  int bagging_freq = 3;  // 0 disables bagging
  double drop_rate = 0.1;
  int max_bins = 255;
  int min_data_in_leaf = 20;
  double lambda_l2 = 0.0;
  double min_gain = 0.0;
  double min_sum_hessian = 1e-3;
  std::uint64_t seed = 0;

  /// Throws stylo::Error on any out-of-range field.
  void validate() const;

  bool operator==(const TrainParams&) const = default;
};

/// Capacity presets: small (10, 100, 8), medium (12, 500, 10),
/// big and culled (20, 1500, 12). Culled additionally implies min_df 0.1
/// on the vocabulary, which is enforced by the pipeline, not here.
std::optional<TrainParams> preset_params(std::string_view name);
std::vector<std::string> preset_names();

double sigmoid(double raw);

struct GradHess {
  double grad;
  double hess;
};

/// Binary log-loss: grad = p - y, hess = p(1 - p) with p = sigmoid(raw).
GradHess logistic_grad_hess(double raw, int label);
void logistic_grad_hess(std::span<const double> raw, std::span<const int> labels, std::span<double> grad,
                        std::span<double> hess);

/// Mean binary log-loss of raw scores.
double log_loss(std::span<const double> raw, std::span<const int> labels);

class GbdtEnsemble {
 public:
  double base_score = 0.0;
  std::vector<Tree> trees;
  std::vector<BinMapper> bins;
  TrainParams params;

  std::size_t num_features() const { return bins.size(); }

  /// Throws stylo::Error on a dimension mismatch.
  double predict_raw(const SparseVector& x) const;
  double predict_proba(const SparseVector& x) const { return sigmoid(predict_raw(x)); }
  std::vector<double> predict_proba(const FeatureMatrix& m, unsigned threads = 1) const;

  bool operator==(const GbdtEnsemble&) const = default;
};

struct TrainOptions {
  unsigned threads = 1;
  /// Receives the mean training log-loss after every iteration.
  std::vector<double>* loss_trace = nullptr;
};

/// DART boosting with periodic bagging without replacement. Labels come
/// from the matrix. Throws when only one class is present.
GbdtEnsemble train(const FeatureMatrix& matrix, const TrainParams& params, const TrainOptions& options = {});
GbdtEnsemble train(const FeatureMatrix& matrix, std::span<const int> labels, const TrainParams& params,
                   const TrainOptions& options = {});

/// Rescales for one DART step: every dropped tree gets k/(k+1), and the
/// returned weight for the new tree is 1/(k+1) (1 when nothing is dropped).
double apply_dart_normalization(std::vector<Tree>& trees, std::span<const std::size_t> dropped);

/// Draws ceil(fraction * n) distinct row indices, returned sorted.
std::vector<std::uint32_t> draw_bag(std::size_t n, double fraction, Rng& rng);

inline constexpr int kModelFormatVersion = 1;

void save_model(const GbdtEnsemble& model, std::ostream& out);
std::string save_model(const GbdtEnsemble& model);
/// Throws ParseError with a line number on any malformed section.
GbdtEnsemble load_model(std::istream& in);
GbdtEnsemble load_model_file(const std::string& path);

}  // namespace stylo
