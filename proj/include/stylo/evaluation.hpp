// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stylo {

/// truth: 1 = machine-generated. score: machine probability in [0, 1].
struct ScoredItem {
  std::string id;
  int truth = 0;
  double score = 0.5;
  std::optional<std::string> source;
};

enum class Decision { Positive, Negative, NonAnswer };

/// Exactly 0.5 abstains; no tolerance band.
Decision decide(double score);

struct MetricsReport {
  double roc_auc = 0.0;
  double brier = 0.0;
  double c_at_1 = 0.0;
  double f1 = 0.0;
  double f05u = 0.0;
  double mean = 0.0;  // of the five scores above
  double fpr = 0.0;
  double fnr = 0.0;
};

/// Mann-Whitney U with midranks. Throws unless both classes occur.
double roc_auc(std::span<const ScoredItem> items);
/// 1 - mean squared error.
double brier_complement(std::span<const ScoredItem> items);
/// (n_correct + n_unanswered * n_correct / n) / n.
double c_at_1(std::span<const ScoredItem> items);
/// Non-answered positives count as false negatives; 0 when undefined.
double f1_score(std::span<const ScoredItem> items);
/// 1.25 TP / (1.25 TP + 0.25 (FN + U) + FP), U = all non-answers.
double f05u(std::span<const ScoredItem> items);

struct ConfusionRates {
  double fpr = 0.0;
  double fnr = 0.0;
};
/// Non-answers count as errors against their true class.
ConfusionRates confusion_rates(std::span<const ScoredItem> items);

MetricsReport evaluate(std::span<const ScoredItem> items);

/// Unweighted mean of the `mean` fields.
double macro_average(std::span<const MetricsReport> reports);

struct SourceBreakdown {
  MetricsReport overall;
  std::map<std::string, MetricsReport> per_source;
  double macro_average = 0.0;
};

/// Requires a source on every item.
SourceBreakdown evaluate_by_source(std::span<const ScoredItem> items);

nlohmann::ordered_json to_json(const MetricsReport& report);
nlohmann::ordered_json to_json(const SourceBreakdown& breakdown);

}  // namespace stylo
