// SPDX-License-Identifier: Apache-2.0

#include "stylo/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "stylo/error.hpp"

namespace stylo {

namespace {

void check_items(std::span<const ScoredItem> items) {
  if (items.empty()) throw Error("no scored items");
  for (const auto& it : items) {
    if (it.truth != 0 && it.truth != 1) throw Error("truth must be 0 or 1 for item '" + it.id + "'");
    if (!(it.score >= 0.0 && it.score <= 1.0)) throw Error("score outside [0, 1] for item '" + it.id + "'");
  }
}

struct Counts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t unanswered_pos = 0, unanswered_neg = 0;

  std::size_t unanswered() const { return unanswered_pos + unanswered_neg; }
};

Counts count(std::span<const ScoredItem> items) {
  Counts c;
  for (const auto& it : items) {
    switch (decide(it.score)) {
      case Decision::Positive: (it.truth == 1 ? c.tp : c.fp) += 1; break;
      case Decision::Negative: (it.truth == 0 ? c.tn : c.fn) += 1; break;
      case Decision::NonAnswer: (it.truth == 1 ? c.unanswered_pos : c.unanswered_neg) += 1; break;
    }
  }
  return c;
}

void require_both_classes(const Counts& c, const char* metric) {
  std::size_t pos = c.tp + c.fn + c.unanswered_pos;
  std::size_t neg = c.tn + c.fp + c.unanswered_neg;
  if (pos == 0 || neg == 0) throw Error(std::string(metric) + " needs both classes");
}

}  // namespace

Decision decide(double score) {
  if (score > 0.5) return Decision::Positive;
  if (score < 0.5) return Decision::Negative;
  return Decision::NonAnswer;
}

double roc_auc(std::span<const ScoredItem> items) {
  check_items(items);
  const std::size_t n = items.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items[a].score < items[b].score; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && items[order[j]].score == items[order[i]].score) ++j;
    // ranks i+1 .. j share their midrank
    double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (items[order[k]].truth == 1) {
        rank_sum_pos += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("ROC-AUC needs both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double brier_complement(std::span<const ScoredItem> items) {
  check_items(items);
  double sq = 0.0;
  for (const auto& it : items) {
    double d = it.score - static_cast<double>(it.truth);
    sq += d * d;
  }
  return 1.0 - sq / static_cast<double>(items.size());
}

double c_at_1(std::span<const ScoredItem> items) {
  check_items(items);
  auto c = count(items);
  const double n = static_cast<double>(items.size());
  const double correct = static_cast<double>(c.tp + c.tn);
  return (correct + static_cast<double>(c.unanswered()) * correct / n) / n;
}

double f1_score(std::span<const ScoredItem> items) {
  check_items(items);
  auto c = count(items);
  const double tp = static_cast<double>(c.tp);
  const double denom = 2.0 * tp + static_cast<double>(c.fp) + static_cast<double>(c.fn + c.unanswered_pos);
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

double f05u(std::span<const ScoredItem> items) {
  check_items(items);
  auto c = count(items);
  const double tp = static_cast<double>(c.tp);
  const double denom =
      1.25 * tp + 0.25 * static_cast<double>(c.fn + c.unanswered()) + static_cast<double>(c.fp);
  return denom == 0.0 ? 0.0 : 1.25 * tp / denom;
}

ConfusionRates confusion_rates(std::span<const ScoredItem> items) {
  check_items(items);
  auto c = count(items);
  require_both_classes(c, "FPR/FNR");
  const double fp = static_cast<double>(c.fp + c.unanswered_neg);
  const double fn = static_cast<double>(c.fn + c.unanswered_pos);
  return {fp / (fp + static_cast<double>(c.tn)), fn / (fn + static_cast<double>(c.tp))};
}

MetricsReport evaluate(std::span<const ScoredItem> items) {
  MetricsReport r;
  r.roc_auc = roc_auc(items);
  r.brier = brier_complement(items);
  r.c_at_1 = c_at_1(items);
  r.f1 = f1_score(items);
  r.f05u = f05u(items);
  r.mean = (r.roc_auc + r.brier + r.c_at_1 + r.f1 + r.f05u) / 5.0;
  auto rates = confusion_rates(items);
  r.fpr = rates.fpr;
  r.fnr = rates.fnr;
  return r;
}

double macro_average(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error("macro-average needs at least one report");
  double total = 0.0;
  for (const auto& r : reports) total += r.mean;
  return total / static_cast<double>(reports.size());
}

SourceBreakdown evaluate_by_source(std::span<const ScoredItem> items) {
  std::map<std::string, std::vector<ScoredItem>> groups;
  for (const auto& it : items) {
    if (!it.source) throw Error("item '" + it.id + "' has no source");
    groups[*it.source].push_back(it);
  }
  SourceBreakdown out;
  out.overall = evaluate(items);
  std::vector<MetricsReport> reports;
  for (const auto& [source, group] : groups) {
    try {
      auto r = evaluate(group);
      out.per_source.emplace(source, r);
      reports.push_back(r);
    } catch (const Error& e) {
      throw Error("source '" + source + "': " + e.what());
    }
  }
  out.macro_average = macro_average(reports);
  return out;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["roc_auc"] = r.roc_auc;
  j["brier"] = r.brier;
  j["c_at_1"] = r.c_at_1;
  j["f1"] = r.f1;
  j["f05u"] = r.f05u;
  j["mean"] = r.mean;
  j["fpr"] = r.fpr;
  j["fnr"] = r.fnr;
  return j;
}

nlohmann::ordered_json to_json(const SourceBreakdown& b) {
  nlohmann::ordered_json j = to_json(b.overall);
  nlohmann::ordered_json sources = nlohmann::ordered_json::object();
  for (const auto& [name, r] : b.per_source) sources[name] = to_json(r);
  j["per_source"] = std::move(sources);
  j["macro_average"] = b.macro_average;
  return j;
}

}  // namespace stylo
