// SPDX-License-Identifier: Apache-2.0

#include "stylo/cv.hpp"

#include <array>
#include <fstream>

#include <json.hpp>

#include "stylo/error.hpp"
#include "stylo/parallel.hpp"
#include "stylo/random.hpp"

namespace stylo {

namespace {

constexpr std::uint64_t kFoldStream = 0xf01d5eedULL;

std::string fold_file(std::size_t fold) { return "fold_" + std::to_string(fold) + ".txt"; }

}  // namespace

std::vector<std::uint32_t> FoldAssignment::rows_in(std::size_t fold) const {
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) rows.push_back(static_cast<std::uint32_t>(i));
  }
  return rows;
}

std::vector<std::uint32_t> FoldAssignment::rows_outside(std::size_t fold) const {
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) rows.push_back(static_cast<std::uint32_t>(i));
  }
  return rows;
}

FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("k must be at least 2");
  std::array<std::vector<std::uint32_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("labels must be 0 or 1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<std::uint32_t>(i));
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw Error("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                  " rows, fewer than k = " + std::to_string(k));
    }
  }

  FoldAssignment out{k, seed, std::vector<std::uint32_t>(labels.size(), 0)};
  Rng rng(mix_seed(seed, kFoldStream));
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(members.begin(), members.end());
    for (auto row : members) {
      out.fold_of[row] = static_cast<std::uint32_t>(next);
      next = (next + 1) % k;
    }
  }
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& matrix, std::span<const std::uint32_t> rows) {
  FeatureMatrix out;
  out.dimension = matrix.dimension;
  for (auto r : rows) out.add_row(matrix.ids[r], matrix.labels[r], matrix.rows[r]);
  return out;
}

double CvModel::predict_single(const SparseVector& x) const {
  if (models.empty()) throw Error("empty CV model");
  return models.front().predict_proba(x);
}

double CvModel::predict_averaged(const SparseVector& x) const {
  if (models.empty()) throw Error("empty CV model");
  double total = 0.0;
  for (const auto& m : models) total += m.predict_proba(x);
  return total / static_cast<double>(models.size());
}

std::vector<double> CvModel::out_of_fold(const FeatureMatrix& m) const {
  if (folds.fold_of.size() != m.size()) throw Error("fold assignment does not cover the matrix");
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = models.at(folds.fold_of[i]).predict_proba(m.rows[i]);
  return out;
}

CvModel train_cv(const FeatureMatrix& matrix, const TrainParams& params, std::size_t k, std::uint64_t seed,
                 unsigned threads) {
  params.validate();
  CvModel cv;
  cv.folds = stratified_folds(matrix.labels, k, seed);
  cv.models.resize(k);
  parallel_for(k, threads, [&](std::size_t f) {
    TrainParams fold_params = params;
    fold_params.seed = mix_seed(seed, f);
    auto rows = cv.folds.rows_outside(f);
    cv.models[f] = train(select_rows(matrix, rows), fold_params);
  });
  return cv;
}

void save_cv_model(const CvModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "stylo-cv";
  manifest["version"] = 1;
  manifest["k"] = model.folds.k;
  manifest["seed"] = model.folds.seed;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < model.models.size(); ++f) {
    std::ofstream out(dir / fold_file(f), std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / fold_file(f)).string());
    save_model(model.models[f], out);
    files.push_back(fold_file(f));
  }
  manifest["models"] = std::move(files);
  manifest["folds"] = model.folds.fold_of;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(1) << '\n';
  if (!out) throw Error("write failure in CV manifest");
}

CvModel load_cv_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed CV manifest: " + std::string(e.what()));
  }
  CvModel cv;
  try {
    if (manifest.at("format") != "stylo-cv" || manifest.at("version") != 1) throw Error("unsupported CV manifest");
    cv.folds.k = manifest.at("k").get<std::size_t>();
    cv.folds.seed = manifest.at("seed").get<std::uint64_t>();
    cv.folds.fold_of = manifest.at("folds").get<std::vector<std::uint32_t>>();
    for (const auto& name : manifest.at("models")) {
      auto path = dir / name.get<std::string>();
      try {
        cv.models.push_back(load_model_file(path.string()));
      } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed CV manifest: " + std::string(e.what()));
  }
  if (cv.models.empty() || cv.models.size() != cv.folds.k) throw Error("CV manifest lists " + std::to_string(cv.models.size()) + " models for k = " + std::to_string(cv.folds.k));
  for (const auto& m : cv.models) {
    if (m.num_features() != cv.models.front().num_features()) throw Error("CV fold models disagree on dimension");
  }
  return cv;
}

}  // namespace stylo
