// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stylo/features.hpp"

namespace stylo {

inline constexpr std::size_t kDefaultClassCap = 1500;

struct VocabEntry {
  FeatureKey key;
  std::size_t index = 0;
  std::uint64_t corpus_count = 0;
  double doc_freq = 0.0;  // documents containing the key / corpus size

  bool operator==(const VocabEntry&) const = default;
};

struct Culling {
  std::optional<double> min_df;
  std::optional<double> max_df;

  bool operator==(const Culling&) const = default;
};

/// The trained feature space: a dense column index per retained key.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Re-densifies indices in the given order.
  Vocabulary(std::vector<VocabEntry> entries, std::size_t corpus_size, std::size_t class_cap, Culling culling);

  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::optional<std::size_t> index_of(const FeatureKey& key) const;
  std::size_t class_size(FeatureClass cls) const;

  std::size_t corpus_size() const { return corpus_size_; }
  std::size_t class_cap() const { return class_cap_; }
  const Culling& culling() const { return culling_; }

  bool operator==(const Vocabulary& other) const {
    return entries_ == other.entries_ && corpus_size_ == other.corpus_size_ && class_cap_ == other.class_cap_ &&
           culling_ == other.culling_;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<FeatureKey, std::size_t, FeatureKeyHash> lookup_;
  std::size_t corpus_size_ = 0;
  std::size_t class_cap_ = kDefaultClassCap;
  Culling culling_;
};

/// Mergeable corpus statistics (occurrence count and document count per key).
class VocabularyBuilder {
 public:
  /// Throws on a repeated document id.
  void add(std::string_view doc_id, const FeatureBag& bag);
  /// Folds another shard in; shards must cover disjoint documents.
  void merge(const VocabularyBuilder& other);

  std::size_t documents() const { return ids_.size(); }

  /// Keeps the `class_cap` most frequent keys per class (ties: smaller key
  /// text first). Indices run LEMMA, POS, DEP, MORPH, then by rank.
  Vocabulary build(std::size_t corpus_size, std::size_t class_cap = kDefaultClassCap) const;

 private:
  struct Stats {
    std::uint64_t count = 0;
    std::uint64_t docs = 0;
  };
  std::unordered_map<FeatureKey, Stats, FeatureKeyHash> stats_;
  std::unordered_set<std::string> ids_;
};

/// Builds from bags whose document ids are their positions. Throws on empty input.
Vocabulary build_vocabulary(std::span<const FeatureBag> bags, std::size_t class_cap = kDefaultClassCap);

/// Drops entries whose document frequency is strictly below min_df or
/// strictly above max_df. Thresholds must lie in (0, 1].
Vocabulary apply_culling(const Vocabulary& vocab, std::optional<double> min_df, std::optional<double> max_df);

void save_vocabulary(const Vocabulary& vocab, std::ostream& out);
/// An empty input is only accepted with allow_empty.
Vocabulary load_vocabulary(std::istream& in, bool allow_empty = false);

}  // namespace stylo
