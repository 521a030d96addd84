// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include <CLI11.hpp>

#include "stylo/error.hpp"
#include "stylo/pipeline.hpp"

namespace {

struct TrainingFlags {
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<unsigned> threads;
};

void add_training_flags(CLI::App* cmd, TrainingFlags& f) {
  cmd->add_option("--preset", f.preset, "small | medium | big | culled")
      ->check(CLI::IsMember({"small", "medium", "big", "culled"}));
  cmd->add_option("--config", f.config, "JSON file with explicit training keys")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

stylo::PipelineConfig resolve(const TrainingFlags& f) {
  auto config = stylo::make_config(f.preset, f.config ? std::optional<std::filesystem::path>(*f.config) : std::nullopt);
  if (f.seed) {
    config.seed = *f.seed;
    config.params.seed = *f.seed;
  }
  if (f.k) config.k = *f.k;
  if (f.threads) config.threads = *f.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stylometric machine-generated text detection: features, DART-boosted trees, PAN metrics"};
  app.require_subcommand(1);

  stylo::VocabCommand vocab;
  std::optional<double> min_df, max_df;
  auto* vocab_cmd = app.add_subcommand("vocab", "Build a capped (and optionally culled) vocabulary");
  vocab_cmd->add_option("--corpus", vocab.corpus, "JSON-lines corpus or CoNLL-U manifest")->required();
  vocab_cmd->add_option("--out", vocab.out, "vocabulary file to write")->required();
  vocab_cmd->add_option("--cap", vocab.cap, "maximum keys per feature class")->capture_default_str();
  vocab_cmd->add_option("--min-df", min_df, "drop keys with document frequency strictly below");
  vocab_cmd->add_option("--max-df", max_df, "drop keys with document frequency strictly above");
  vocab_cmd->add_option("--threads", vocab.threads, "worker threads (0 = all cores)");

  stylo::VectorizeCommand vectorize;
  auto* vec_cmd = app.add_subcommand("vectorize", "Write the normalized-frequency matrix cache");
  vec_cmd->add_option("--corpus", vectorize.corpus)->required();
  vec_cmd->add_option("--vocab", vectorize.vocab)->required()->check(CLI::ExistingFile);
  vec_cmd->add_option("--out", vectorize.out)->required();
  vec_cmd->add_option("--threads", vectorize.threads);

  stylo::TrainCommand train;
  TrainingFlags train_flags;
  std::optional<std::string> train_corpus, train_matrix;
  auto* train_cmd = app.add_subcommand("train", "Train one model on the whole corpus");
  auto* tc = train_cmd->add_option("--corpus", train_corpus);
  train_cmd->add_option("--matrix", train_matrix, "matrix cache from 'vectorize'")->excludes(tc);
  train_cmd->add_option("--vocab", train.vocab)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "model file to write")->required();
  add_training_flags(train_cmd, train_flags);

  stylo::CvCommand cv;
  TrainingFlags cv_flags;
  std::optional<std::string> cv_corpus, cv_matrix;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold training with out-of-fold scores");
  auto* cc = cv_cmd->add_option("--corpus", cv_corpus);
  cv_cmd->add_option("--matrix", cv_matrix)->excludes(cc);
  cv_cmd->add_option("--vocab", cv.vocab)->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("--out", cv.out, "directory for fold models, manifest and oof.jsonl")->required();
  cv_cmd->add_option("--k", cv_flags.k, "number of folds");
  add_training_flags(cv_cmd, cv_flags);

  stylo::PredictCommand predict;
  std::string mode = "cv";
  auto* pred_cmd = app.add_subcommand("predict", "Score a corpus with a model file or CV directory");
  pred_cmd->add_option("--model", predict.model)->required()->check(CLI::ExistingPath);
  pred_cmd->add_option("--vocab", predict.vocab)->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--corpus", predict.corpus)->required();
  pred_cmd->add_option("--mode", mode, "single | cv")->check(CLI::IsMember({"single", "cv"}))->capture_default_str();
  pred_cmd->add_option("--out", predict.out)->required();
  pred_cmd->add_option("--threads", predict.threads);

  stylo::EvaluateCommand evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compute ROC-AUC, Brier, C@1, F1, F0.5u, mean, FPR, FNR");
  eval_cmd->add_option("--predictions", evaluate.predictions)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", evaluate.truth)->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--per-source", evaluate.per_source, "per-source reports plus macro-average");
  eval_cmd->add_option("--out", evaluate.out, "report JSON to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (vocab_cmd->parsed()) {
      vocab.culling = {min_df, max_df};
      stylo::run_vocab(vocab, std::cerr);
    } else if (vec_cmd->parsed()) {
      stylo::run_vectorize(vectorize, std::cerr);
    } else if (train_cmd->parsed()) {
      if (train_corpus) train.corpus = *train_corpus;
      if (train_matrix) train.matrix = *train_matrix;
      train.config = resolve(train_flags);
      stylo::run_train(train, std::cerr);
    } else if (cv_cmd->parsed()) {
      if (cv_corpus) cv.corpus = *cv_corpus;
      if (cv_matrix) cv.matrix = *cv_matrix;
      cv.config = resolve(cv_flags);
      stylo::run_cv(cv, std::cerr);
    } else if (pred_cmd->parsed()) {
      predict.mode = mode == "single" ? stylo::PredictMode::Single : stylo::PredictMode::Cv;
      stylo::run_predict(predict, std::cerr);
    } else if (eval_cmd->parsed()) {
      stylo::run_evaluate(evaluate, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
