// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "../support/fixtures.hpp"
#include "stylo/error.hpp"
#include "stylo/vectorizer.hpp"

using namespace stylo;

namespace {

FeatureKey pos(std::string text) { return {FeatureClass::Pos, 1, std::move(text)}; }

Vocabulary vocab_of(std::vector<FeatureKey> keys) {
  std::vector<VocabEntry> entries;
  for (auto& k : keys) entries.push_back({std::move(k), 0, 1, 1.0});
  return Vocabulary(std::move(entries), 1, kDefaultClassCap, {});
}

}  // namespace

TEST_CASE("values are normalized by the per-document stratum total") {
  FeatureBag bag;
  bag.add(pos("NOUN"), 2);
  bag.add(pos("VERB"));
  bag.add(pos("PUNCT"));
  auto v = vectorize(bag, vocab_of({pos("NOUN"), pos("VERB")}));
  CHECK(v.dimension == 2);
  CHECK(v.indices == std::vector<std::uint32_t>{0, 1});
  CHECK(v.values == std::vector<double>{0.5, 0.25});
  CHECK(v.value(1) == 0.25);
}

TEST_CASE("disjoint bag, single key, empty vocabulary") {
  FeatureBag bag;
  bag.add(pos("X"));
  CHECK(vectorize(bag, vocab_of({pos("NOUN")})).nnz() == 0);
  auto one = vectorize(bag, vocab_of({pos("NOUN"), pos("X")}));
  CHECK(one.indices == std::vector<std::uint32_t>{1});
  CHECK(one.values == std::vector<double>{1.0});
  CHECK_THROWS_AS(vectorize(bag, Vocabulary{}), Error);
}

TEST_CASE("stratum sums are at most one and equal one under full coverage") {
  Rng rng(8);
  std::vector<AnnotatedDocument> docs;
  std::vector<FeatureBag> bags;
  for (int i = 0; i < 40; ++i) {
    docs.push_back(stylo::testing::random_document(rng, "d" + std::to_string(i)));
    bags.push_back(extract_all(docs.back()));
  }
  auto full = build_vocabulary(bags, 1u << 20);
  auto capped = build_vocabulary(bags, 10);
  for (const auto& bag : bags) {
    for (const auto* vocab : {&full, &capped}) {
      auto v = vectorize(bag, *vocab);
      CHECK(v.nnz() <= bag.size());
      std::map<std::pair<int, int>, double> sums;
      for (std::size_t i = 0; i < v.nnz(); ++i) {
        CHECK(v.values[i] > 0.0);
        CHECK(v.values[i] <= 1.0);
        if (i) CHECK(v.indices[i - 1] < v.indices[i]);
        const auto& key = vocab->entries()[v.indices[i]].key;
        sums[{static_cast<int>(key.cls), key.order}] += v.values[i];
      }
      for (const auto& [stratum, s] : sums) {
        if (vocab == &full) {
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        } else {
          CHECK(s <= 1.0 + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("assemble_matrix") {
  auto a = stylo::testing::john_loves_mary("a", 0);
  auto b = stylo::testing::john_loves_mary("b", 1);
  FeatureBag bag = extract_all(a);
  auto vocab = build_vocabulary(std::span(&bag, 1));

  std::vector<AnnotatedDocument> docs{a, b};
  auto m = assemble_matrix(docs, vocab, 2);
  CHECK(m.size() == 2);
  CHECK(m.ids == std::vector<std::string>{"a", "b"});
  CHECK(m.labels == std::vector<int>{0, 1});
  CHECK(m.rows[0] == m.rows[1]);
  CHECK(m == assemble_matrix(docs, vocab, 1));

  CHECK_THROWS_WITH_AS(assemble_matrix(std::span<const AnnotatedDocument>{}, vocab), "empty corpus", Error);
  std::vector<AnnotatedDocument> dup{a, a};
  CHECK_THROWS_AS(assemble_matrix(dup, vocab), Error);
}

TEST_CASE("matrix file round trip") {
  Rng rng(12);
  std::vector<AnnotatedDocument> docs;
  std::vector<FeatureBag> bags;
  for (int i = 0; i < 25; ++i) {
    docs.push_back(stylo::testing::random_document(rng, "d" + std::to_string(i)));
    bags.push_back(extract_all(docs.back()));
  }
  auto m = assemble_matrix(docs, build_vocabulary(bags, 30));
  std::ostringstream os;
  save_matrix(m, os);
  std::istringstream in(os.str());
  auto back = load_matrix(in);
  CHECK(back == m);

  std::istringstream bad("3\t1\nx\t0\t5:0x1p-1\n");
  CHECK_THROWS_AS(load_matrix(bad), ParseError);
}
