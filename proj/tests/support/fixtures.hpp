// SPDX-License-Identifier: Apache-2.0
// Test-only document builders, random generators and brute-force oracles.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "stylo/annotation.hpp"
#include "stylo/features.hpp"
#include "stylo/random.hpp"

namespace stylo::testing {

/// head is 1-based as in CoNLL-U; 0 = root.
inline AnnotatedToken tok(std::string lemma, Upos upos, std::size_t head, std::string ne = "O",
                          std::vector<MorphFeature> morph = {}) {
  AnnotatedToken t;
  t.surface = lemma;
  t.lemma = std::move(lemma);
  t.upos = upos;
  t.head = head == 0 ? AnnotatedToken::kRoot : head - 1;
  t.deprel = head == 0 ? "root" : "dep";
  t.ne = *parse_ne_tag(ne);
  t.morph = std::move(morph);
  return t;
}

/// John(B-PERSON) love Mary(B-PERSON) . -- "loves" is the root, the rest attach to it.
inline AnnotatedDocument john_loves_mary(std::string id = "jlm", int label = 0) {
  Sentence s;
  s.tokens = {
      tok("John", Upos::PROPN, 2, "B-PERSON"),
      tok("love", Upos::VERB, 0, "O", {{"Number", "Sing"}, {"Person", "3"}, {"Tense", "Pres"}, {"VerbForm", "Fin"}}),
      tok("Mary", Upos::PROPN, 2, "B-PERSON"),
      tok(".", Upos::PUNCT, 2),
  };
  s.tokens[0].surface = "John";
  s.tokens[1].surface = "loves";
  return AnnotatedDocument{std::move(id), label, {}, {std::move(s)}};
}

inline const std::vector<std::string>& lemma_pool() {
  static const std::vector<std::string> pool = {"the", "a", "cat", "dog", "run", "see", "big", "small",
                                                "and", ",", ".", "of", "to", "be", "not", "Ünïcode"};
  return pool;
}

/// Valid random document: random dependency tree, well-formed BIO, sorted morphs.
inline AnnotatedDocument random_document(Rng& rng, std::string id, std::size_t max_sentences = 5,
                                         std::size_t max_tokens = 12) {
  static const std::vector<std::string> types = {"PERSON", "ORG", "GPE"};
  static const std::vector<std::string> morph_keys = {"Case", "Number", "Person", "Tense"};
  static const std::vector<std::string> morph_vals = {"Nom", "Sing", "Plur", "1", "3", "Past"};
  AnnotatedDocument doc;
  doc.id = std::move(id);
  doc.label = static_cast<int>(rng.below(2));
  if (rng.below(2)) doc.meta.source = "src" + std::to_string(rng.below(3));
  if (rng.below(3) == 0) doc.meta.genre = "news";
  if (rng.below(3) == 0) doc.meta.model = "gpt-x";
  std::size_t ns = 1 + rng.below(max_sentences);
  for (std::size_t s = 0; s < ns; ++s) {
    std::size_t n = 1 + rng.below(max_tokens);
    Sentence sent;
    // Attach tokens in a random order; each new token picks an already-attached head.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    std::vector<std::size_t> head(n, AnnotatedToken::kRoot);
    for (std::size_t i = 1; i < n; ++i) head[order[i]] = order[rng.below(i)];

    std::string open_type;  // type of the span the previous token belongs to
    for (std::size_t i = 0; i < n; ++i) {
      AnnotatedToken t;
      t.lemma = lemma_pool()[rng.below(lemma_pool().size())];
      t.surface = t.lemma;
      t.upos = static_cast<Upos>(rng.below(kUposCount));
      t.head = head[i];
      t.deprel = head[i] == AnnotatedToken::kRoot ? "root" : "dep";
      auto r = rng.below(6);
      if (r == 0) {
        open_type = types[rng.below(types.size())];
        t.ne = NeTag::begin(open_type);
      } else if (r == 1 && !open_type.empty()) {
        t.ne = NeTag::inside(open_type);
      } else {
        open_type.clear();
      }
      for (const auto& k : morph_keys) {
        if (rng.below(3) == 0) t.morph.emplace_back(k, morph_vals[rng.below(morph_vals.size())]);
      }
      sent.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(sent));
  }
  return doc;
}

// ---- brute-force feature oracle -------------------------------------------

using OracleKey = std::tuple<int, int, std::string>;  // class, order, joined components

struct OracleBag {
  std::map<OracleKey, std::uint64_t> counts;
  std::map<std::pair<int, int>, std::uint64_t> totals;
};

// Token-level entity membership straight from the tags.
inline bool in_entity(const AnnotatedToken& t) { return to_string(t.ne) != "O"; }

inline std::string join_units(const std::vector<std::string>& units, std::size_t start, std::size_t n) {
  std::ostringstream os;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) os << '\x1f';
    os << units[start + k];
  }
  return os.str();
}

inline OracleBag oracle_extract(const AnnotatedDocument& doc) {
  OracleBag bag;
  auto add = [&](int cls, int order, std::string text) {
    bag.counts[{cls, order, std::move(text)}] += 1;
    bag.totals[{cls, order}] += 1;
  };
  for (const auto& s : doc.sentences) {
    std::vector<std::string> lemmas, tags;
    for (const auto& t : s.tokens) {
      if (!in_entity(t)) lemmas.push_back(t.lemma);
      tags.push_back(std::string(to_string(t.upos)));
    }
    for (int n = 1; n <= 3; ++n) {
      for (std::size_t i = 0; i + n <= lemmas.size(); ++i) add(0, n, join_units(lemmas, i, n));
    }
    for (int n = 1; n <= 4; ++n) {
      for (std::size_t i = 0; i + n <= tags.size(); ++i) add(1, n, join_units(tags, i, n));
    }
    // every ordered pair at tree distance one, head first
    for (std::size_t h = 0; h < s.tokens.size(); ++h) {
      for (std::size_t d = 0; d < s.tokens.size(); ++d) {
        if (s.tokens[d].head != h || in_entity(s.tokens[h]) || in_entity(s.tokens[d])) continue;
        add(2, 2, s.tokens[h].lemma + '\x1f' + s.tokens[d].lemma);
      }
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      if (t.ne.kind == NeTag::Kind::Inside) continue;  // counted with its B- token
      if (t.ne.kind == NeTag::Kind::Begin) {
        add(3, 1, t.ne.type);
        continue;
      }
      std::ostringstream os;
      for (std::size_t k = 0; k < t.morph.size(); ++k) os << (k ? "|" : "") << t.morph[k].first << '=' << t.morph[k].second;
      add(3, 1, t.morph.empty() ? "_" : os.str());
    }
  }
  return bag;
}

inline OracleBag to_oracle_form(const FeatureBag& bag) {
  OracleBag out;
  for (const auto& [k, n] : bag.counts()) out.counts[{static_cast<int>(k.cls), k.order, k.text}] = n;
  for (auto cls : kFeatureClasses) {
    for (std::size_t o = 1; o <= kMaxOrder; ++o) {
      if (auto t = bag.total(cls, o)) out.totals[{static_cast<int>(cls), static_cast<int>(o)}] = t;
    }
  }
  return out;
}

inline bool operator==(const OracleBag& a, const OracleBag& b) { return a.counts == b.counts && a.totals == b.totals; }

}  // namespace stylo::testing
