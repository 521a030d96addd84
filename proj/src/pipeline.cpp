// SPDX-License-Identifier: Apache-2.0

#include "stylo/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "stylo/corpus.hpp"
#include "stylo/cv.hpp"
#include "stylo/error.hpp"
#include "stylo/evaluation.hpp"
#include "stylo/vectorizer.hpp"

namespace stylo {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

Corpus load_and_report(const std::filesystem::path& path, unsigned threads, std::ostream& log) {
  auto corpus = load_corpus(path, threads);
  log << "corpus " << path.string() << ": " << corpus.stats.documents << " documents (" << corpus.stats.labels[0]
      << " human, " << corpus.stats.labels[1] << " machine), " << corpus.stats.tokens << " tokens, "
      << corpus.stats.dropped << " dropped\n";
  for (const auto& d : corpus.stats.drops) {
    log << "  dropped line " << d.line << (d.id.empty() ? "" : " (" + d.id + ")") << ": " << d.reason << '\n';
  }
  return corpus;
}

Vocabulary load_vocab_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_vocabulary(in);
}

FeatureMatrix training_matrix(const std::optional<std::filesystem::path>& corpus,
                              const std::optional<std::filesystem::path>& matrix, const Vocabulary& vocab,
                              unsigned threads, std::ostream& log) {
  if (corpus.has_value() == matrix.has_value()) throw Error("give exactly one of a corpus or a matrix");
  FeatureMatrix m;
  if (matrix) {
    auto in = open_in(*matrix);
    m = load_matrix(in);
  } else {
    auto docs = load_and_report(*corpus, threads, log);
    m = assemble_matrix(docs.documents, vocab, threads);
  }
  if (m.dimension != vocab.size()) {
    throw Error("matrix dimension " + std::to_string(m.dimension) + " does not match vocabulary size " +
                std::to_string(vocab.size()));
  }
  return m;
}

void log_params(const PipelineConfig& c, std::ostream& log) {
  log << "preset " << c.preset << ": num_leaves=" << c.params.num_leaves << " num_iterations=" << c.params.num_iterations
      << " max_depth=" << c.params.max_depth << " learning_rate=" << c.params.learning_rate
      << " bagging_fraction=" << c.params.bagging_fraction << " bagging_freq=" << c.params.bagging_freq
      << " drop_rate=" << c.params.drop_rate << " seed=" << c.params.seed << '\n';
}

void write_predictions(const std::filesystem::path& path, const std::vector<std::string>& ids,
                       const std::vector<double>& probs) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = ids[i];
    j["label"] = probs[i];
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failure in " + path.string());
}

template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, path.string() + ": malformed JSON: " + e.what());
    }
    try {
      fn(j, lineno);
    } catch (const json::exception& e) {
      throw ParseError(lineno, path.string() + ": " + e.what());
    }
  }
}

}  // namespace

PipelineConfig make_config(const std::optional<std::string>& preset,
                           const std::optional<std::filesystem::path>& config_file) {
  json file = json::object();
  if (config_file) {
    auto in = open_in(*config_file);
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error("malformed config " + config_file->string() + ": " + e.what());
    }
  }
  return make_config_from_json(preset, file);
}

PipelineConfig make_config_from_json(const std::optional<std::string>& preset, const nlohmann::json& file) {
  if (!file.is_object()) throw Error("config must be a JSON object");
  PipelineConfig c;
  std::optional<std::string> name = preset;
  if (!name && file.contains("preset")) name = file.at("preset").get<std::string>();
  if (name) {
    auto p = preset_params(*name);
    if (!p) throw Error("unknown preset '" + *name + "'");
    c.preset = *name;
    c.params = *p;
    if (*name == "culled") c.culling.min_df = kCulledMinDf;
  }

  static const std::unordered_set<std::string> kKeys = {
      "preset",  "num_leaves", "num_iterations", "max_depth", "learning_rate", "bagging_fraction",
      "bagging_freq", "drop_rate", "max_bins", "min_data_in_leaf", "lambda_l2", "min_gain",
      "min_sum_hessian", "seed", "k", "min_df", "max_df", "threads"};
  try {
    for (const auto& [key, value] : file.items()) {
      if (!kKeys.contains(key)) throw Error("unknown config key '" + key + "'");
      auto& p = c.params;
      if (key == "num_leaves") p.num_leaves = value.get<int>();
      else if (key == "num_iterations") p.num_iterations = value.get<int>();
      else if (key == "max_depth") p.max_depth = value.get<int>();
      else if (key == "learning_rate") p.learning_rate = value.get<double>();
      else if (key == "bagging_fraction") p.bagging_fraction = value.get<double>();
      else if (key == "bagging_freq") p.bagging_freq = value.get<int>();
      else if (key == "drop_rate") p.drop_rate = value.get<double>();
      else if (key == "max_bins") p.max_bins = value.get<int>();
      else if (key == "min_data_in_leaf") p.min_data_in_leaf = value.get<int>();
      else if (key == "lambda_l2") p.lambda_l2 = value.get<double>();
      else if (key == "min_gain") p.min_gain = value.get<double>();
      else if (key == "min_sum_hessian") p.min_sum_hessian = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "k") c.k = value.get<std::size_t>();
      else if (key == "min_df") c.culling.min_df = value.get<double>();
      else if (key == "max_df") c.culling.max_df = value.get<double>();
      else if (key == "threads") c.threads = value.get<unsigned>();
    }
  } catch (const json::exception& e) {
    throw Error("config value has the wrong type: " + std::string(e.what()));
  }
  c.params.seed = c.seed;
  c.params.validate();
  return c;
}

void check_vocabulary_for_preset(const PipelineConfig& config, const Vocabulary& vocab) {
  if (config.preset != "culled") return;
  if (!vocab.culling().min_df || *vocab.culling().min_df != kCulledMinDf) {
    throw Error("preset 'culled' needs a vocabulary culled with min_df 0.1 (run 'vocab --min-df 0.1')");
  }
}

void run_vocab(const VocabCommand& cmd, std::ostream& log) {
  auto corpus = load_and_report(cmd.corpus, cmd.threads, log);
  VocabularyBuilder builder;
  for (const auto& doc : corpus.documents) builder.add(doc.id, extract_all(doc));
  auto vocab = builder.build(corpus.documents.size(), cmd.cap);
  auto report = [&](const Vocabulary& v, const char* stage) {
    log << stage << ":";
    for (auto cls : kFeatureClasses) log << ' ' << to_string(cls) << '=' << v.class_size(cls);
    log << " total=" << v.size() << '\n';
  };
  report(vocab, "capped");
  if (cmd.culling.min_df || cmd.culling.max_df) {
    vocab = apply_culling(vocab, cmd.culling.min_df, cmd.culling.max_df);
    report(vocab, "culled");
  }
  auto out = open_out(cmd.out);
  save_vocabulary(vocab, out);
}

void run_vectorize(const VectorizeCommand& cmd, std::ostream& log) {
  auto vocab = load_vocab_file(cmd.vocab);
  auto corpus = load_and_report(cmd.corpus, cmd.threads, log);
  auto m = assemble_matrix(corpus.documents, vocab, cmd.threads);
  auto out = open_out(cmd.out);
  save_matrix(m, out);
  log << "wrote " << m.size() << " rows x " << m.dimension << " columns\n";
}

void run_train(const TrainCommand& cmd, std::ostream& log) {
  auto vocab = load_vocab_file(cmd.vocab);
  check_vocabulary_for_preset(cmd.config, vocab);
  auto m = training_matrix(cmd.corpus, cmd.matrix, vocab, cmd.config.threads, log);
  log_params(cmd.config, log);
  auto model = train(m, cmd.config.params, TrainOptions{cmd.config.threads, nullptr});
  auto out = open_out(cmd.out);
  save_model(model, out);
  log << "trained " << model.trees.size() << " trees on " << m.size() << " rows\n";
}

void run_cv(const CvCommand& cmd, std::ostream& log) {
  auto vocab = load_vocab_file(cmd.vocab);
  check_vocabulary_for_preset(cmd.config, vocab);
  auto m = training_matrix(cmd.corpus, cmd.matrix, vocab, cmd.config.threads, log);
  log_params(cmd.config, log);
  auto cv = train_cv(m, cmd.config.params, cmd.config.k, cmd.config.seed, cmd.config.threads);
  save_cv_model(cv, cmd.out);
  write_predictions(cmd.out / "oof.jsonl", m.ids, cv.out_of_fold(m));
  log << "trained " << cv.models.size() << " fold models on " << m.size() << " rows\n";
}

void run_predict(const PredictCommand& cmd, std::ostream& log) {
  auto vocab = load_vocab_file(cmd.vocab);
  std::optional<CvModel> cv;
  std::optional<GbdtEnsemble> single;
  std::size_t dimension = 0;
  if (std::filesystem::is_directory(cmd.model)) {
    cv = load_cv_model(cmd.model);
    dimension = cv->models.front().num_features();
  } else {
    if (cmd.mode == PredictMode::Cv) log << "note: " << cmd.model.string() << " is a single model; mode ignored\n";
    single = load_model_file(cmd.model.string());
    dimension = single->num_features();
  }
  if (dimension != vocab.size()) {
    throw Error("model dimension " + std::to_string(dimension) + " does not match vocabulary size " +
                std::to_string(vocab.size()));
  }

  auto corpus = load_and_report(cmd.corpus, cmd.threads, log);
  std::vector<std::string> ids;
  std::vector<double> probs;
  if (!corpus.documents.empty()) {
    auto m = assemble_matrix(corpus.documents, vocab, cmd.threads);
    ids = m.ids;
    if (single) {
      probs = single->predict_proba(m, cmd.threads);
    } else {
      probs.resize(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) {
        probs[i] = cmd.mode == PredictMode::Single ? cv->predict_single(m.rows[i]) : cv->predict_averaged(m.rows[i]);
      }
    }
  }
  write_predictions(cmd.out, ids, probs);
  log << "wrote " << ids.size() << " predictions\n";
}

void run_evaluate(const EvaluateCommand& cmd, std::ostream& log) {
  struct Truth {
    int label;
    std::optional<std::string> source;
  };
  std::unordered_map<std::string, Truth> truth;
  for_each_json_line(cmd.truth, [&](const json& j, std::size_t lineno) {
    auto id = j.at("id").get<std::string>();
    Truth t{j.at("label").get<int>(), std::nullopt};
    if (t.label != 0 && t.label != 1) throw ParseError(lineno, "truth label must be 0 or 1");
    if (j.contains("source") && !j.at("source").is_null()) t.source = j.at("source").get<std::string>();
    if (!truth.emplace(id, std::move(t)).second) throw ParseError(lineno, "duplicate truth id '" + id + "'");
  });

  std::vector<ScoredItem> items;
  std::unordered_set<std::string> seen;
  for_each_json_line(cmd.predictions, [&](const json& j, std::size_t lineno) {
    auto id = j.at("id").get<std::string>();
    if (!seen.insert(id).second) throw ParseError(lineno, "duplicate prediction id '" + id + "'");
    auto it = truth.find(id);
    if (it == truth.end()) throw ParseError(lineno, "no truth entry for id '" + id + "'");
    items.push_back({id, it->second.label, j.at("label").get<double>(), it->second.source});
  });
  if (items.size() < truth.size()) log << "warning: " << truth.size() - items.size() << " truth ids have no prediction\n";

  nlohmann::ordered_json report;
  if (cmd.per_source) {
    auto breakdown = evaluate_by_source(items);
    report = to_json(breakdown);
    log << "macro-average over " << breakdown.per_source.size() << " sources: " << breakdown.macro_average << '\n';
  } else {
    auto r = evaluate(items);
    report = to_json(r);
    log << "mean " << r.mean << " over " << items.size() << " items\n";
  }
  auto out = open_out(cmd.out);
  out << report.dump(2) << '\n';
  if (!out) throw Error("write failure in " + cmd.out.string());
}

}  // namespace stylo
