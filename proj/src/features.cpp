// SPDX-License-Identifier: Apache-2.0

#include "stylo/features.hpp"

#include <tuple>

namespace stylo {

namespace {

constexpr std::array<std::string_view, kFeatureClassCount> kClassNames = {"LEMMA", "POS", "DEP", "MORPH"};

// Per sentence: true for tokens covered by some NE span.
std::vector<bool> entity_mask(const Sentence& sentence) {
  std::vector<bool> mask(sentence.tokens.size(), false);
  for (const auto& span : ne_spans(sentence)) {
    for (std::size_t i = span.start; i <= span.end; ++i) mask[i] = true;
  }
  return mask;
}

template <class Units>
void emit_ngrams(const Units& units, FeatureClass cls, std::size_t max_order, FeatureBag& bag) {
  FeatureKey key{cls, 1, {}};  // scratch buffer, reused across n-grams
  for (std::size_t n = 1; n <= max_order && n <= units.size(); ++n) {
    key.order = static_cast<std::uint8_t>(n);
    for (std::size_t start = 0; start + n <= units.size(); ++start) {
      key.text.assign(units[start]);
      for (std::size_t k = 1; k < n; ++k) {
        key.text += kKeySeparator;
        key.text += units[start + k];
      }
      bag.add_copy(key);
    }
  }
}

}  // namespace

std::string_view to_string(FeatureClass cls) { return kClassNames[static_cast<std::size_t>(cls)]; }

std::optional<FeatureClass> parse_feature_class(std::string_view text) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == text) return static_cast<FeatureClass>(i);
  }
  return std::nullopt;
}

bool valid_order(FeatureClass cls, std::size_t order) {
  switch (cls) {
    case FeatureClass::Lemma: return order >= 1 && order <= 3;
    case FeatureClass::Pos: return order >= 1 && order <= 4;
    case FeatureClass::Dep: return order == 2;
    case FeatureClass::Morph: return order == 1;
  }
  return false;
}

std::vector<std::string_view> FeatureKey::components() const {
  std::vector<std::string_view> parts;
  std::string_view rest = text;
  while (true) {
    auto pos = rest.find(kKeySeparator);
    parts.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) return parts;
    rest.remove_prefix(pos + 1);
  }
}

bool operator<(const FeatureKey& a, const FeatureKey& b) {
  return std::tie(a.cls, a.text, a.order) < std::tie(b.cls, b.text, b.order);
}

void FeatureBag::add(FeatureKey key, std::uint32_t n) {
  if (n == 0) return;
  totals_[static_cast<std::size_t>(key.cls)][key.order] += n;
  counts_[std::move(key)] += n;
}

void FeatureBag::add_copy(const FeatureKey& key, std::uint32_t n) {
  if (n == 0) return;
  totals_[static_cast<std::size_t>(key.cls)][key.order] += n;
  auto it = counts_.find(key);
  if (it != counts_.end()) {
    it->second += n;
  } else {
    counts_.emplace(key, n);
  }
}

void FeatureBag::merge(const FeatureBag& other) {
  for (const auto& [key, n] : other.counts_) counts_[key] += n;
  for (std::size_t c = 0; c < kFeatureClassCount; ++c) {
    for (std::size_t o = 0; o <= kMaxOrder; ++o) totals_[c][o] += other.totals_[c][o];
  }
}

std::uint32_t FeatureBag::count(const FeatureKey& key) const {
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

std::string morph_bundle_key(const std::vector<MorphFeature>& morph) {
  if (morph.empty()) return "_";
  std::string out;
  for (const auto& [k, v] : morph) {
    if (!out.empty()) out += kMorphJoiner;
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

void extract_lemma_ngrams(const AnnotatedDocument& doc, FeatureBag& bag) {
  std::vector<std::string_view> lemmas;
  for (const auto& sentence : doc.sentences) {
    auto mask = entity_mask(sentence);
    lemmas.clear();
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (!mask[i]) lemmas.push_back(sentence.tokens[i].lemma);
    }
    emit_ngrams(lemmas, FeatureClass::Lemma, 3, bag);
  }
}

void extract_pos_ngrams(const AnnotatedDocument& doc, FeatureBag& bag) {
  std::vector<std::string_view> tags;
  for (const auto& sentence : doc.sentences) {
    tags.clear();
    for (const auto& tok : sentence.tokens) tags.push_back(to_string(tok.upos));
    emit_ngrams(tags, FeatureClass::Pos, 4, bag);
  }
}

void extract_dep_bigrams(const AnnotatedDocument& doc, FeatureBag& bag) {
  FeatureKey key{FeatureClass::Dep, 2, {}};
  for (const auto& sentence : doc.sentences) {
    auto mask = entity_mask(sentence);
    for (std::size_t d = 0; d < sentence.tokens.size(); ++d) {
      const auto& dep = sentence.tokens[d];
      if (dep.is_root() || mask[d] || mask[dep.head]) continue;
      key.text.assign(sentence.tokens[dep.head].lemma);
      key.text += kKeySeparator;
      key.text += dep.lemma;
      bag.add_copy(key);
    }
  }
}

void extract_morph_unigrams(const AnnotatedDocument& doc, FeatureBag& bag) {
  FeatureKey key{FeatureClass::Morph, 1, {}};
  for (const auto& sentence : doc.sentences) {
    auto spans = ne_spans(sentence);
    std::size_t next_span = 0;
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (next_span < spans.size() && spans[next_span].start == i) {
        bag.add(FeatureKey{FeatureClass::Morph, 1, spans[next_span].type});
        i = spans[next_span].end;
        ++next_span;
        continue;
      }
      key.text = morph_bundle_key(sentence.tokens[i].morph);
      bag.add_copy(key);
    }
  }
}

FeatureBag extract_all(const AnnotatedDocument& doc) {
  FeatureBag bag;
  std::size_t tokens = 0;
  for (const auto& s : doc.sentences) tokens += s.tokens.size();
  bag.reserve(4 * tokens);
  extract_lemma_ngrams(doc, bag);
  extract_pos_ngrams(doc, bag);
  extract_dep_bigrams(doc, bag);
  extract_morph_unigrams(doc, bag);
  return bag;
}

}  // namespace stylo
