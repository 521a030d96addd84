// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "stylo/features.hpp"

using namespace stylo;
using stylo::testing::tok;

namespace {

FeatureKey key(FeatureClass cls, std::uint8_t order, std::string text) { return {cls, order, std::move(text)}; }

template <class Extract>
FeatureBag run(Extract extract, const AnnotatedDocument& doc) {
  FeatureBag bag;
  extract(doc, bag);
  return bag;
}

AnnotatedDocument doc_of(std::vector<Sentence> sentences) { return {"d", 0, {}, std::move(sentences)}; }

Sentence chain(std::vector<std::string> lemmas) {
  // token i+1 depends on token i; token 0 is the root
  Sentence s;
  for (std::size_t i = 0; i < lemmas.size(); ++i) s.tokens.push_back(tok(lemmas[i], Upos::NOUN, i));
  return s;
}

}  // namespace

TEST_CASE("lemma n-grams delete entity tokens") {
  auto bag = run(extract_lemma_ngrams, stylo::testing::john_loves_mary());
  CHECK(bag.size() == 3);
  CHECK(bag.count(key(FeatureClass::Lemma, 1, "love")) == 1);
  CHECK(bag.count(key(FeatureClass::Lemma, 1, ".")) == 1);
  CHECK(bag.count(key(FeatureClass::Lemma, 2, "love\x1f.")) == 1);
  CHECK(bag.total(FeatureClass::Lemma, 3) == 0);
}

TEST_CASE("lemma n-grams do not cross sentences") {
  auto bag = run(extract_lemma_ngrams, doc_of({chain({"a", "b"}), chain({"c"})}));
  CHECK(bag.total(FeatureClass::Lemma, 2) == 1);
  CHECK(bag.count(key(FeatureClass::Lemma, 2, "a\x1f" "b")) == 1);
}

TEST_CASE("lemma n-grams of an all-entity document are empty") {
  Sentence s;
  s.tokens = {tok("Acme", Upos::PROPN, 0, "B-ORG"), tok("Corp", Upos::PROPN, 1, "I-ORG")};
  CHECK(run(extract_lemma_ngrams, doc_of({s})).empty());
}

TEST_CASE("POS n-grams cover every token") {
  auto bag = run(extract_pos_ngrams, stylo::testing::john_loves_mary());
  CHECK(bag.total(FeatureClass::Pos, 1) == 4);
  CHECK(bag.total(FeatureClass::Pos, 2) == 3);
  CHECK(bag.total(FeatureClass::Pos, 3) == 2);
  CHECK(bag.total(FeatureClass::Pos, 4) == 1);
  CHECK(bag.count(key(FeatureClass::Pos, 4, "PROPN\x1fVERB\x1fPROPN\x1fPUNCT")) == 1);
  CHECK(bag.count(key(FeatureClass::Pos, 1, "PROPN")) == 2);

  auto three = run(extract_pos_ngrams, doc_of({chain({"a", "b", "c"})}));
  CHECK(three.total(FeatureClass::Pos, 4) == 0);

  Sentence punct;
  punct.tokens = {tok(".", Upos::PUNCT, 0)};
  auto one = run(extract_pos_ngrams, doc_of({punct}));
  CHECK(one.size() == 1);
  CHECK(one.count(key(FeatureClass::Pos, 1, "PUNCT")) == 1);
}

TEST_CASE("DEP bigrams are head-first, distance one, entity-free") {
  auto bag = run(extract_dep_bigrams, stylo::testing::john_loves_mary());
  CHECK(bag.size() == 1);
  CHECK(bag.count(key(FeatureClass::Dep, 2, "love\x1f.")) == 1);

  CHECK(run(extract_dep_bigrams, doc_of({chain({"a"})})).empty());

  auto c = run(extract_dep_bigrams, doc_of({chain({"a", "b", "c"})}));
  CHECK(c.size() == 2);
  CHECK(c.count(key(FeatureClass::Dep, 2, "a\x1f" "b")) == 1);
  CHECK(c.count(key(FeatureClass::Dep, 2, "b\x1f" "c")) == 1);
  CHECK(c.count(key(FeatureClass::Dep, 2, "a\x1f" "c")) == 0);
}

TEST_CASE("MORPH unigrams") {
  auto bag = run(extract_morph_unigrams, stylo::testing::john_loves_mary());
  CHECK(bag.size() == 3);
  CHECK(bag.count(key(FeatureClass::Morph, 1, "PERSON")) == 2);
  CHECK(bag.count(key(FeatureClass::Morph, 1, "Number=Sing|Person=3|Tense=Pres|VerbForm=Fin")) == 1);
  CHECK(bag.count(key(FeatureClass::Morph, 1, "_")) == 1);

  Sentence org;
  org.tokens = {tok("Acme", Upos::PROPN, 0, "B-ORG"), tok("Corp", Upos::PROPN, 1, "I-ORG")};
  auto o = run(extract_morph_unigrams, doc_of({org}));
  CHECK(o.size() == 1);
  CHECK(o.count(key(FeatureClass::Morph, 1, "ORG")) == 1);

  auto plain = run(extract_morph_unigrams, doc_of({chain({"a", "b", "c"}), chain({"d"})}));
  CHECK(plain.count(key(FeatureClass::Morph, 1, "_")) == 4);
  CHECK(morph_bundle_key({}) == "_");
}

TEST_CASE("extract_all is the union of the four extractors") {
  auto doc = stylo::testing::john_loves_mary();
  FeatureBag expected;
  for (auto* f : {extract_lemma_ngrams, extract_pos_ngrams, extract_dep_bigrams, extract_morph_unigrams}) {
    expected.merge(run(f, doc));
  }
  auto all = extract_all(doc);
  CHECK(all == expected);
  CHECK(all.total(FeatureClass::Pos, 4) == 1);
  CHECK(all == extract_all(doc));
}

TEST_CASE("extract_all matches the brute-force enumerator on random documents") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    auto doc = stylo::testing::random_document(rng, "r");
    REQUIRE(stylo::testing::to_oracle_form(extract_all(doc)) == stylo::testing::oracle_extract(doc));
  }
}

TEST_CASE("totals follow the n-gram count formula and never include entity lemmas") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto doc = stylo::testing::random_document(rng, "r");
    std::uint64_t pos[5] = {}, lemma[4] = {};
    std::set<std::string> entity_lemmas, other_lemmas;
    for (const auto& s : doc.sentences) {
      std::size_t len = s.tokens.size(), kept = 0;
      for (const auto& t : s.tokens) {
        (t.ne.is_entity() ? entity_lemmas : other_lemmas).insert(t.lemma);
        kept += !t.ne.is_entity();
      }
      for (std::size_t n = 1; n <= 4; ++n) pos[n] += len >= n ? len - n + 1 : 0;
      for (std::size_t n = 1; n <= 3; ++n) lemma[n] += kept >= n ? kept - n + 1 : 0;
    }
    auto bag = extract_all(doc);
    for (std::size_t n = 1; n <= 4; ++n) CHECK(bag.total(FeatureClass::Pos, n) == pos[n]);
    for (std::size_t n = 1; n <= 3; ++n) CHECK(bag.total(FeatureClass::Lemma, n) == lemma[n]);
    for (const auto& [k, c] : bag.counts()) {
      CHECK(c >= 1);
      if (k.cls != FeatureClass::Lemma && k.cls != FeatureClass::Dep) continue;
      for (auto part : k.components()) {
        std::string p(part);
        if (entity_lemmas.count(p)) CHECK(other_lemmas.count(p) == 1);
      }
    }
  }
}

TEST_CASE("feature classes and keys") {
  for (auto cls : kFeatureClasses) CHECK(parse_feature_class(to_string(cls)) == cls);
  CHECK_FALSE(parse_feature_class("lemma"));
  CHECK(valid_order(FeatureClass::Lemma, 3));
  CHECK_FALSE(valid_order(FeatureClass::Lemma, 4));
  CHECK(valid_order(FeatureClass::Pos, 4));
  CHECK_FALSE(valid_order(FeatureClass::Dep, 1));
  CHECK_FALSE(valid_order(FeatureClass::Morph, 2));
  CHECK(key(FeatureClass::Pos, 3, "A\x1f" "B\x1f" "C").components().size() == 3);
}
