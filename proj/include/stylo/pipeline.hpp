// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "stylo/gbdt.hpp"
#include "stylo/vocabulary.hpp"

namespace stylo {

/// Minimum document frequency the "culled" preset requires of its vocabulary.
inline constexpr double kCulledMinDf = 0.1;

struct PipelineConfig {
  std::string preset = "custom";
  TrainParams params;
  Culling culling;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Preset values, then the JSON config file (explicit keys only), in that order.
/// An unknown preset or config key throws.
PipelineConfig make_config(const std::optional<std::string>& preset,
                           const std::optional<std::filesystem::path>& config_file);
/// Same, with the config already parsed into a JSON object.
PipelineConfig make_config_from_json(const std::optional<std::string>& preset, const nlohmann::json& config);

/// Throws when the preset is "culled" and the vocabulary was not culled at min_df 0.1.
void check_vocabulary_for_preset(const PipelineConfig& config, const Vocabulary& vocab);

struct VocabCommand {
  std::filesystem::path corpus;
  std::filesystem::path out;
  std::size_t cap = kDefaultClassCap;
  Culling culling;
  unsigned threads = 1;
};

struct VectorizeCommand {
  std::filesystem::path corpus;
  std::filesystem::path vocab;
  std::filesystem::path out;
  unsigned threads = 1;
};

/// Exactly one of corpus / matrix supplies the training rows.
struct TrainCommand {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> matrix;
  std::filesystem::path vocab;
  PipelineConfig config;
  std::filesystem::path out;
};

/// Writes fold models and manifest.json into `out`, plus oof.jsonl with one
/// out-of-fold probability per training document.
struct CvCommand {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> matrix;
  std::filesystem::path vocab;
  PipelineConfig config;
  std::filesystem::path out;
};

enum class PredictMode { Single, Cv };

/// `model` is a model file, or a CV directory (mode selects single or averaged).
struct PredictCommand {
  std::filesystem::path model;
  std::filesystem::path vocab;
  std::filesystem::path corpus;
  PredictMode mode = PredictMode::Cv;
  std::filesystem::path out;
  unsigned threads = 1;
};

struct EvaluateCommand {
  std::filesystem::path predictions;
  std::filesystem::path truth;
  bool per_source = false;
  std::filesystem::path out;
};

/// Each command writes its data files and reports progress on `log`.
/// Failures throw stylo::Error.
void run_vocab(const VocabCommand& cmd, std::ostream& log);
void run_vectorize(const VectorizeCommand& cmd, std::ostream& log);
void run_train(const TrainCommand& cmd, std::ostream& log);
void run_cv(const CvCommand& cmd, std::ostream& log);
void run_predict(const PredictCommand& cmd, std::ostream& log);
void run_evaluate(const EvaluateCommand& cmd, std::ostream& log);

}  // namespace stylo
