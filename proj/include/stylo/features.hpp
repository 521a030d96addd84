// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylo/annotation.hpp"

namespace stylo {

enum class FeatureClass : std::uint8_t { Lemma = 0, Pos = 1, Dep = 2, Morph = 3 };

inline constexpr std::size_t kFeatureClassCount = 4;
inline constexpr std::size_t kMaxOrder = 4;
inline constexpr std::array<FeatureClass, kFeatureClassCount> kFeatureClasses = {
    FeatureClass::Lemma, FeatureClass::Pos, FeatureClass::Dep, FeatureClass::Morph};

/// Joins n-gram components inside a key. Never valid inside a component.
inline constexpr char kKeySeparator = '\x1f';
/// Joins Key=Value pairs of a morphological bundle.
inline constexpr char kMorphJoiner = '|';

std::string_view to_string(FeatureClass cls);
std::optional<FeatureClass> parse_feature_class(std::string_view text);

/// LEMMA 1..3, POS 1..4, DEP 2, MORPH 1.
bool valid_order(FeatureClass cls, std::size_t order);

struct FeatureKey {
  FeatureClass cls = FeatureClass::Lemma;
  std::uint8_t order = 1;
  std::string text;  // components joined by kKeySeparator

  std::vector<std::string_view> components() const;

  bool operator==(const FeatureKey&) const = default;
};

/// Class, then key text; used for every deterministic ordering of keys.
bool operator<(const FeatureKey& a, const FeatureKey& b);

/// Keys are short, so a word-at-a-time multiply-mix beats the byte-wise std::hash.
/// Deliberately not noexcept: libstdc++ then stores hash codes in the nodes
/// instead of rehashing neighbours on every bucket walk.
struct FeatureKeyHash {
  std::size_t operator()(const FeatureKey& k) const {
    constexpr std::uint64_t kMul = 0x9e3779b97f4a7c15ULL;
    std::uint64_t h = (static_cast<std::uint64_t>(k.cls) << 8 | k.order) ^ (k.text.size() * kMul);
    const char* p = k.text.data();
    std::size_t n = k.text.size();
    for (; n >= 8; n -= 8, p += 8) {
      std::uint64_t w;
      std::memcpy(&w, p, 8);
      h = (h ^ w) * kMul;
      h ^= h >> 29;
    }
    if (n > 0) {
      std::uint64_t w = 0;
      for (std::size_t i = 0; i < n; ++i) w |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
      h = (h ^ w) * kMul;
    }
    h ^= h >> 32;
    h *= kMul;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Occurrence counts for one document, plus per-(class, order) totals that
/// serve as normalization denominators.
class FeatureBag {
 public:
  using CountMap = std::unordered_map<FeatureKey, std::uint32_t, FeatureKeyHash>;

  void add(FeatureKey key, std::uint32_t n = 1);
  /// Copies the key only when it is new to the bag.
  void add_copy(const FeatureKey& key, std::uint32_t n = 1);
  void reserve(std::size_t keys) { counts_.reserve(keys); }
  void merge(const FeatureBag& other);

  const CountMap& counts() const { return counts_; }
  std::uint64_t total(FeatureClass cls, std::size_t order) const {
    return totals_[static_cast<std::size_t>(cls)][order];
  }
  std::uint32_t count(const FeatureKey& key) const;
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  bool operator==(const FeatureBag& other) const {
    return counts_ == other.counts_ && totals_ == other.totals_;
  }

 private:
  CountMap counts_;
  std::array<std::array<std::uint64_t, kMaxOrder + 1>, kFeatureClassCount> totals_{};
};

/// Lemma 1-3 grams within sentences, after deleting tokens inside NE spans.
void extract_lemma_ngrams(const AnnotatedDocument& doc, FeatureBag& bag);
/// UPOS 1-4 grams within sentences over every token.
void extract_pos_ngrams(const AnnotatedDocument& doc, FeatureBag& bag);
/// Head-first lemma pairs over dependency edges with neither end in an NE span.
void extract_dep_bigrams(const AnnotatedDocument& doc, FeatureBag& bag);
/// One entity-type unigram per NE span, one morph-bundle unigram per other token.
void extract_morph_unigrams(const AnnotatedDocument& doc, FeatureBag& bag);

FeatureBag extract_all(const AnnotatedDocument& doc);

/// Canonical morph unigram text for a bundle ("_" when empty).
std::string morph_bundle_key(const std::vector<MorphFeature>& morph);

}  // namespace stylo
