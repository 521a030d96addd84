// SPDX-License-Identifier: Apache-2.0
// Brute-force metric definitions: pair counting for AUC, explicit decision
// tallies for everything else.

#pragma once

#include <vector>

#include "stylo/evaluation.hpp"

namespace stylo::testing {

struct Tally {
  double tp = 0, fp = 0, tn = 0, fn = 0, u_pos = 0, u_neg = 0;
  double n() const { return tp + fp + tn + fn + u_pos + u_neg; }
};

inline Tally tally(const std::vector<ScoredItem>& items) {
  Tally t;
  for (const auto& it : items) {
    if (it.score == 0.5) {
      (it.truth ? t.u_pos : t.u_neg) += 1;
    } else if (it.score > 0.5) {
      (it.truth ? t.tp : t.fp) += 1;
    } else {
      (it.truth ? t.fn : t.tn) += 1;
    }
  }
  return t;
}

inline double oracle_auc(const std::vector<ScoredItem>& items) {
  double wins = 0, pairs = 0;
  for (const auto& p : items) {
    if (!p.truth) continue;
    for (const auto& q : items) {
      if (q.truth) continue;
      pairs += 1;
      wins += p.score > q.score ? 1.0 : p.score == q.score ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

inline double oracle_brier(const std::vector<ScoredItem>& items) {
  double s = 0;
  for (const auto& it : items) s += (it.score - it.truth) * (it.score - it.truth);
  return 1.0 - s / static_cast<double>(items.size());
}

inline double oracle_c_at_1(const std::vector<ScoredItem>& items) {
  auto t = tally(items);
  double correct = t.tp + t.tn, unanswered = t.u_pos + t.u_neg;
  return (correct + unanswered * correct / t.n()) / t.n();
}

inline double oracle_f1(const std::vector<ScoredItem>& items) {
  auto t = tally(items);
  double fn = t.fn + t.u_pos;
  double precision = t.tp + t.fp > 0 ? t.tp / (t.tp + t.fp) : 0.0;
  double recall = t.tp + fn > 0 ? t.tp / (t.tp + fn) : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

inline double oracle_f05u(const std::vector<ScoredItem>& items) {
  auto t = tally(items);
  double u = t.u_pos + t.u_neg;
  double denom = 1.25 * t.tp + 0.25 * (t.fn + u) + t.fp;
  return denom > 0 ? 1.25 * t.tp / denom : 0.0;
}

/// All label vectors with both classes and score vectors over `grid`,
/// for every length up to max_n. Calls fn(items) for each combination.
template <class Fn>
void for_each_scored_set(const std::vector<double>& grid, std::size_t max_n, Fn&& fn) {
  for (std::size_t n = 2; n <= max_n; ++n) {
    std::size_t score_sets = 1;
    for (std::size_t i = 0; i < n; ++i) score_sets *= grid.size();
    for (std::size_t labels = 1; labels + 1 < (1u << n); ++labels) {
      for (std::size_t code = 0; code < score_sets; ++code) {
        std::vector<ScoredItem> items(n);
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
          items[i].truth = static_cast<int>((labels >> i) & 1u);
          items[i].score = grid[c % grid.size()];
          c /= grid.size();
        }
        fn(items);
      }
    }
  }
}

}  // namespace stylo::testing
