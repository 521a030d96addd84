// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../support/fixtures.hpp"
#include "stylo/corpus.hpp"
#include "stylo/error.hpp"
#include "stylo/pipeline.hpp"

using namespace stylo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& f) const { return path / f; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

void write_truth(const fs::path& corpus, const fs::path& truth) {
  std::ifstream in(corpus);
  auto docs = read_jsonl_corpus(in).documents;
  std::ofstream out(truth);
  for (const auto& d : docs) {
    nlohmann::json j{{"id", d.id}, {"label", d.label}};
    if (d.meta.source) j["source"] = *d.meta.source;
    out << j.dump() << '\n';
  }
}

/// Label-1 documents lean on "dog", label-0 documents on "cat".
void write_corpus(const fs::path& p, std::size_t n, std::uint64_t seed, bool with_source = false) {
  Rng rng(seed);
  std::vector<AnnotatedDocument> docs;
  for (std::size_t i = 0; i < n; ++i) {
    auto d = stylo::testing::random_document(rng, "doc" + std::to_string(i));
    d.label = static_cast<int>(i % 2);
    if (with_source) d.meta.source = i % 4 < 2 ? "news" : "blogs";
    for (auto& s : d.sentences) {
      for (auto& t : s.tokens) {
        if (rng.below(3) == 0) t.lemma = d.label ? "dog" : "cat";
      }
    }
    docs.push_back(std::move(d));
  }
  std::ofstream out(p);
  write_jsonl_corpus(docs, out);
}

PipelineConfig quick_config() {
  auto c = make_config("small", std::nullopt);
  c.params.num_iterations = 12;
  c.params.min_data_in_leaf = 5;
  c.k = 3;
  return c;
}

}  // namespace

TEST_CASE("make_config") {
  TempDir dir("stylo_config_test");
  auto big = make_config("big", std::nullopt);
  CHECK(big.params.num_leaves == 20);
  CHECK(big.params.num_iterations == 1500);
  CHECK(big.params.max_depth == 12);
  auto culled = make_config("culled", std::nullopt);
  CHECK(culled.culling.min_df == kCulledMinDf);

  write(dir / "c.json", R"({"preset": "medium", "num_iterations": 7, "seed": 42, "k": 4})");
  auto c = make_config(std::nullopt, dir / "c.json");
  CHECK(c.preset == "medium");
  CHECK(c.params.num_leaves == 12);
  CHECK(c.params.num_iterations == 7);
  CHECK(c.params.seed == 42);
  CHECK(c.k == 4);

  write(dir / "bad.json", R"({"num_trees": 7})");
  CHECK_THROWS_AS(make_config(std::nullopt, dir / "bad.json"), Error);
  write(dir / "type.json", R"({"num_leaves": "many"})");
  CHECK_THROWS_AS(make_config(std::nullopt, dir / "type.json"), Error);
  write(dir / "range.json", R"({"drop_rate": 1.0})");
  CHECK_THROWS_AS(make_config(std::nullopt, dir / "range.json"), Error);
  CHECK_THROWS_AS(make_config("enormous", std::nullopt), Error);
}

TEST_CASE("vocab command") {
  TempDir dir("stylo_vocab_cmd_test");
  std::ostringstream log;

  SUBCASE("cap 3 per class") {
    write_corpus(dir / "c.jsonl", 20, 1);
    run_vocab({dir / "c.jsonl", dir / "v.tsv", 3, {}, 1}, log);
    std::ifstream in(dir / "v.tsv");
    auto v = load_vocabulary(in);
    for (auto cls : kFeatureClasses) CHECK(v.class_size(cls) == 3);
    CHECK(log.str().find("total=12") != std::string::npos);
  }
  SUBCASE("document-frequency thresholds on two documents") {
    auto a = stylo::testing::john_loves_mary("a", 0);
    auto b = stylo::testing::john_loves_mary("b", 1);
    b.sentences[0].tokens[3].lemma = "!";
    std::vector<AnnotatedDocument> docs{a, b};
    {
      std::ofstream out(dir / "two.jsonl");
      write_jsonl_corpus(docs, out);
    }
    auto load_back = [&] {
      std::ifstream in(dir / "v.tsv");
      return load_vocabulary(in);
    };
    // df 0.5 sits on the threshold and is kept
    run_vocab({dir / "two.jsonl", dir / "v.tsv", kDefaultClassCap, {0.5, std::nullopt}, 1}, log);
    auto at_half = load_back();
    CHECK(at_half.index_of({FeatureClass::Lemma, 1, "."}));
    CHECK(at_half.index_of({FeatureClass::Lemma, 1, "!"}));
    // anything above 0.5 keeps only keys present in both documents
    run_vocab({dir / "two.jsonl", dir / "v.tsv", kDefaultClassCap, {0.75, std::nullopt}, 1}, log);
    auto shared = load_back();
    CHECK_FALSE(shared.index_of({FeatureClass::Lemma, 1, "."}));
    CHECK_FALSE(shared.index_of({FeatureClass::Lemma, 1, "!"}));
    CHECK(shared.index_of({FeatureClass::Lemma, 1, "love"}));
    for (const auto& e : shared.entries()) CHECK(e.doc_freq == 1.0);
    CHECK(shared.size() < at_half.size());
  }
}

TEST_CASE("end-to-end commands") {
  TempDir dir("stylo_pipeline_test");
  std::ostringstream log;
  write_corpus(dir / "train.jsonl", 90, 2);
  write_corpus(dir / "test.jsonl", 30, 3, true);
  run_vocab({dir / "train.jsonl", dir / "vocab.tsv", 200, {}, 1}, log);

  auto config = quick_config();
  run_train({dir / "train.jsonl", std::nullopt, dir / "vocab.tsv", config, dir / "model.txt"}, log);
  CHECK(slurp(dir / "model.txt").find("num_leaves=10 num_iterations=12 max_depth=8") != std::string::npos);

  SUBCASE("train twice, and from a cached matrix") {
    run_train({dir / "train.jsonl", std::nullopt, dir / "vocab.tsv", config, dir / "again.txt"}, log);
    CHECK(slurp(dir / "model.txt") == slurp(dir / "again.txt"));
    run_vectorize({dir / "train.jsonl", dir / "vocab.tsv", dir / "m.tsv", 2}, log);
    run_train({std::nullopt, dir / "m.tsv", dir / "vocab.tsv", config, dir / "cached.txt"}, log);
    CHECK(slurp(dir / "model.txt") == slurp(dir / "cached.txt"));
    CHECK_THROWS_AS(run_train({dir / "train.jsonl", dir / "m.tsv", dir / "vocab.tsv", config, dir / "x.txt"}, log),
                    Error);
  }
  SUBCASE("culled preset needs a culled vocabulary") {
    auto culled = make_config("culled", std::nullopt);
    culled.params.num_iterations = 2;
    CHECK_THROWS_AS(
        run_train({dir / "train.jsonl", std::nullopt, dir / "vocab.tsv", culled, dir / "c.txt"}, log), Error);
    run_vocab({dir / "train.jsonl", dir / "culled.tsv", 200, {kCulledMinDf, std::nullopt}, 1}, log);
    run_train({dir / "train.jsonl", std::nullopt, dir / "culled.tsv", culled, dir / "c.txt"}, log);
    CHECK(fs::exists(dir / "c.txt"));
  }
  SUBCASE("cv, predict and evaluate") {
    run_cv({dir / "train.jsonl", std::nullopt, dir / "vocab.tsv", config, dir / "cv"}, log);
    CHECK(fs::exists(dir / "cv" / "manifest.json"));
    CHECK(fs::exists(dir / "cv" / "fold_2.txt"));
    CHECK(slurp(dir / "cv" / "oof.jsonl").size() > 0);

    run_predict({dir / "cv", dir / "vocab.tsv", dir / "test.jsonl", PredictMode::Cv, dir / "p_cv.jsonl", 1}, log);
    run_predict({dir / "cv", dir / "vocab.tsv", dir / "test.jsonl", PredictMode::Single, dir / "p_1.jsonl", 1}, log);
    run_predict({dir / "cv", dir / "vocab.tsv", dir / "test.jsonl", PredictMode::Cv, dir / "p_cv4.jsonl", 4}, log);
    CHECK(slurp(dir / "p_cv.jsonl") == slurp(dir / "p_cv4.jsonl"));
    CHECK(slurp(dir / "p_cv.jsonl") != slurp(dir / "p_1.jsonl"));

    std::istringstream lines(slurp(dir / "p_cv.jsonl"));
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
      auto j = nlohmann::json::parse(line);
      CHECK(j.size() == 2);
      CHECK(j["id"] == "doc" + std::to_string(count));
      CHECK(j["label"].get<double>() >= 0.0);
      ++count;
    }
    CHECK(count == 30);

    write_truth(dir / "test.jsonl", dir / "truth.jsonl");
    run_evaluate({dir / "p_cv.jsonl", dir / "truth.jsonl", true, dir / "report.json"}, log);
    auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["per_source"].size() == 2);
    CHECK(report["macro_average"].get<double>() > 0.0);
    CHECK(report["roc_auc"].get<double>() > 0.5);
  }
  SUBCASE("predict edge cases") {
    write(dir / "empty.jsonl", "");
    run_predict({dir / "model.txt", dir / "vocab.tsv", dir / "empty.jsonl", PredictMode::Cv, dir / "p.jsonl", 1}, log);
    CHECK(fs::exists(dir / "p.jsonl"));
    CHECK(slurp(dir / "p.jsonl").empty());

    auto text = slurp(dir / "model.txt");
    write(dir / "broken.txt", text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(
        run_predict({dir / "broken.txt", dir / "vocab.tsv", dir / "test.jsonl", PredictMode::Cv, dir / "p.jsonl", 1},
                    log),
        ParseError);

    run_vocab({dir / "train.jsonl", dir / "small.tsv", 5, {}, 1}, log);
    CHECK_THROWS_AS(
        run_predict({dir / "model.txt", dir / "small.tsv", dir / "test.jsonl", PredictMode::Cv, dir / "p.jsonl", 1},
                    log),
        Error);
  }
}

TEST_CASE("evaluate command") {
  TempDir dir("stylo_evaluate_test");
  std::ostringstream log;
  write(dir / "truth.jsonl",
        "{\"id\":\"a\",\"label\":1,\"source\":\"x\"}\n{\"id\":\"b\",\"label\":0,\"source\":\"x\"}\n"
        "{\"id\":\"c\",\"label\":1,\"source\":\"y\"}\n{\"id\":\"d\",\"label\":0,\"source\":\"y\"}\n");

  SUBCASE("perfect predictions") {
    write(dir / "p.jsonl", "{\"id\":\"a\",\"label\":1.0}\n{\"id\":\"b\",\"label\":0.0}\n"
                           "{\"id\":\"c\",\"label\":1.0}\n{\"id\":\"d\",\"label\":0.0}\n");
    run_evaluate({dir / "p.jsonl", dir / "truth.jsonl", false, dir / "r.json"}, log);
    auto r = nlohmann::json::parse(slurp(dir / "r.json"));
    for (const char* k : {"roc_auc", "brier", "c_at_1", "f1", "f05u", "mean"}) CHECK(r[k].get<double>() == 1.0);
    CHECK(r["fpr"].get<double>() == 0.0);
    CHECK(r["fnr"].get<double>() == 0.0);
  }
  SUBCASE("all non-answers") {
    write(dir / "p.jsonl", "{\"id\":\"a\",\"label\":0.5}\n{\"id\":\"b\",\"label\":0.5}\n"
                           "{\"id\":\"c\",\"label\":0.5}\n{\"id\":\"d\",\"label\":0.5}\n");
    run_evaluate({dir / "p.jsonl", dir / "truth.jsonl", true, dir / "r.json"}, log);
    auto r = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(r["c_at_1"].get<double>() == 0.0);
    CHECK(r["macro_average"].get<double>() ==
          doctest::Approx((r["per_source"]["x"]["mean"].get<double>() + r["per_source"]["y"]["mean"].get<double>()) / 2));
  }
  SUBCASE("unknown and duplicate ids") {
    write(dir / "p.jsonl", "{\"id\":\"z\",\"label\":0.5}\n");
    CHECK_THROWS_AS(run_evaluate({dir / "p.jsonl", dir / "truth.jsonl", false, dir / "r.json"}, log), Error);
    write(dir / "p.jsonl", "{\"id\":\"a\",\"label\":0.5}\n{\"id\":\"a\",\"label\":0.5}\n");
    CHECK_THROWS_AS(run_evaluate({dir / "p.jsonl", dir / "truth.jsonl", false, dir / "r.json"}, log), Error);
  }
}
