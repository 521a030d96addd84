// SPDX-License-Identifier: Apache-2.0
// Python bindings: metrics, feature extraction, vocabulary, vectorizing and
// the boosted model. Sparse matrices cross the boundary as CSR arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stylo/corpus.hpp"
#include "stylo/error.hpp"
#include "stylo/evaluation.hpp"
#include "stylo/features.hpp"
#include "stylo/gbdt.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/vectorizer.hpp"
#include "stylo/vocabulary.hpp"

namespace py = pybind11;
using namespace stylo;

namespace {

using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using ValueArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<ScoredItem> scored(const std::vector<int>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size()) throw Error("labels and scores differ in length");
  std::vector<ScoredItem> items(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("labels must be 0 or 1");
    items[i].id = std::to_string(i);
    items[i].truth = labels[i];
    items[i].score = scores[i];
  }
  return items;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["roc_auc"] = r.roc_auc;
  d["brier"] = r.brier;
  d["c_at_1"] = r.c_at_1;
  d["f1"] = r.f1;
  d["f05u"] = r.f05u;
  d["mean"] = r.mean;
  d["fpr"] = r.fpr;
  d["fnr"] = r.fnr;
  return d;
}

AnnotatedDocument parse_document(const std::string& line) {
  std::istringstream in(line);
  auto corpus = read_jsonl_corpus(in);
  if (!corpus.stats.drops.empty()) throw Error(corpus.stats.drops.front().reason);
  if (corpus.documents.size() != 1) throw Error("expected exactly one JSON document");
  return std::move(corpus.documents.front());
}

FeatureClass feature_class(const std::string& name) {
  auto cls = parse_feature_class(name);
  if (!cls) throw Error("unknown feature class '" + name + "'");
  return *cls;
}

FeatureMatrix from_csr(const IndexArray& indptr, const IndexArray& indices, const ValueArray& data,
                       std::size_t n_features) {
  auto ptr = indptr.unchecked<1>();
  auto idx = indices.unchecked<1>();
  auto val = data.unchecked<1>();
  if (ptr.shape(0) < 1 || idx.shape(0) != val.shape(0) || ptr(ptr.shape(0) - 1) != idx.shape(0)) {
    throw Error("inconsistent CSR arrays");
  }
  FeatureMatrix m;
  m.dimension = n_features;
  for (py::ssize_t r = 0; r + 1 < ptr.shape(0); ++r) {
    SparseVector v;
    v.dimension = n_features;
    if (ptr(r) > ptr(r + 1)) throw Error("indptr must be non-decreasing");
    for (auto k = ptr(r); k < ptr(r + 1); ++k) {
      if (idx(k) < 0 || static_cast<std::size_t>(idx(k)) >= n_features) throw Error("column index out of range");
      if (!v.indices.empty() && static_cast<std::uint32_t>(idx(k)) <= v.indices.back()) {
        throw Error("column indices must be strictly increasing within a row");
      }
      if (val(k) == 0.0) continue;
      v.indices.push_back(static_cast<std::uint32_t>(idx(k)));
      v.values.push_back(val(k));
    }
    m.add_row(std::to_string(r), 0, std::move(v));
  }
  return m;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict to_csr(const FeatureMatrix& m) {
  std::vector<std::int64_t> indptr{0}, indices;
  std::vector<double> data;
  for (const auto& row : m.rows) {
    indices.insert(indices.end(), row.indices.begin(), row.indices.end());
    data.insert(data.end(), row.values.begin(), row.values.end());
    indptr.push_back(static_cast<std::int64_t>(indices.size()));
  }
  py::dict d;
  d["ids"] = m.ids;
  d["labels"] = to_array(m.labels);
  d["indptr"] = to_array(indptr);
  d["indices"] = to_array(indices);
  d["data"] = to_array(data);
  d["n_features"] = m.dimension;
  return d;
}

py::dict params_dict(const TrainParams& p) {
  py::dict d;
  d["num_leaves"] = p.num_leaves;
  d["num_iterations"] = p.num_iterations;
  d["max_depth"] = p.max_depth;
  d["learning_rate"] = p.learning_rate;
  d["bagging_fraction"] = p.bagging_fraction;
  d["bagging_freq"] = p.bagging_freq;
  d["drop_rate"] = p.drop_rate;
  d["max_bins"] = p.max_bins;
  d["min_data_in_leaf"] = p.min_data_in_leaf;
  d["lambda_l2"] = p.lambda_l2;
  d["min_gain"] = p.min_gain;
  d["min_sum_hessian"] = p.min_sum_hessian;
  d["seed"] = p.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stylo, m) {
  m.doc() = "Stylometric machine-generated text detection";
  m.attr("__version__") = "0.1.0";
  py::register_exception<Error>(m, "StyloError", PyExc_ValueError);

  m.def("presets", &preset_names, "Names of the built-in parameter presets.");

  m.def(
      "evaluate",
      [](const std::vector<int>& labels, const std::vector<double>& scores) {
        auto items = scored(labels, scores);
        return report_dict(evaluate(items));
      },
      py::arg("labels"), py::arg("scores"),
      "AUC, Brier complement, c@1, F1, F0.5u, their mean, FPR and FNR. A score of exactly 0.5 is a non-answer.");

  m.def(
      "extract_features",
      [](const std::string& line) {
        auto bag = extract_all(parse_document(line));
        py::dict out;
        for (const auto& [key, n] : bag.counts()) {
          py::tuple parts(key.components().size());
          std::size_t i = 0;
          for (auto c : key.components()) parts[i++] = py::str(c.data(), c.size());
          out[py::make_tuple(std::string(to_string(key.cls)), key.order, parts)] = n;
        }
        return out;
      },
      py::arg("document_json"),
      "Feature counts of one JSON-lines document, keyed by (class, order, components).");

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static(
          "build",
          [](const std::filesystem::path& corpus, std::size_t cap, std::optional<double> min_df,
             std::optional<double> max_df, unsigned threads) {
            auto docs = load_corpus(corpus, threads).documents;
            VocabularyBuilder builder;
            for (const auto& d : docs) builder.add(d.id, extract_all(d));
            auto vocab = builder.build(docs.size(), cap);
            if (min_df || max_df) vocab = apply_culling(vocab, min_df, max_df);
            return vocab;
          },
          py::arg("corpus"), py::arg("cap") = kDefaultClassCap, py::arg("min_df") = py::none(),
          py::arg("max_df") = py::none(), py::arg("threads") = 1)
      .def_static(
          "load",
          [](const std::filesystem::path& path) {
            std::ifstream in(path);
            if (!in) throw Error("cannot open " + path.string());
            return load_vocabulary(in);
          },
          py::arg("path"))
      .def(
          "save",
          [](const Vocabulary& v, const std::filesystem::path& path) {
            std::ofstream out(path);
            if (!out) throw Error("cannot write " + path.string());
            save_vocabulary(v, out);
          },
          py::arg("path"))
      .def("__len__", &Vocabulary::size)
      .def("class_size", [](const Vocabulary& v, const std::string& cls) { return v.class_size(feature_class(cls)); })
      .def_property_readonly("corpus_size", &Vocabulary::corpus_size)
      .def("entries",
           [](const Vocabulary& v) {
             py::list out;
             for (const auto& e : v.entries()) {
               out.append(py::make_tuple(std::string(to_string(e.key.cls)), e.key.order, e.key.text,
                                         e.corpus_count, e.doc_freq));
             }
             return out;
           })
      .def(
          "vectorize",
          [](const Vocabulary& v, const std::filesystem::path& corpus, unsigned threads) {
            auto docs = load_corpus(corpus, threads).documents;
            return to_csr(assemble_matrix(docs, v, threads));
          },
          py::arg("corpus"), py::arg("threads") = 1,
          "CSR arrays (indptr, indices, data) plus ids and labels for a corpus file.");

  py::class_<GbdtEnsemble>(m, "Model")
      .def_static(
          "train",
          [](const IndexArray& indptr, const IndexArray& indices, const ValueArray& data, const LabelArray& labels,
             std::size_t n_features, std::optional<std::string> preset, unsigned threads, const py::kwargs& params) {
            auto matrix = from_csr(indptr, indices, data, n_features);
            auto lab = labels.unchecked<1>();
            if (static_cast<std::size_t>(lab.shape(0)) != matrix.size()) throw Error("one label per row is required");
            for (py::ssize_t i = 0; i < lab.shape(0); ++i) matrix.labels[static_cast<std::size_t>(i)] = lab(i);
            auto overrides = nlohmann::json::parse(py::module_::import("json").attr("dumps")(params).cast<std::string>());
            auto config = make_config_from_json(preset, overrides);
            TrainOptions options;
            options.threads = threads;
            py::gil_scoped_release release;
            return train(matrix, config.params, options);
          },
          py::arg("indptr"), py::arg("indices"), py::arg("data"), py::arg("labels"), py::arg("n_features"),
          py::kw_only(), py::arg("preset") = py::none(), py::arg("threads") = 1,
          "Train on CSR arrays. Keyword arguments override preset parameters.")
      .def_static(
          "load", [](const std::filesystem::path& path) { return load_model_file(path.string()); }, py::arg("path"))
      .def_static(
          "loads",
          [](const std::string& text) {
            std::istringstream in(text);
            return load_model(in);
          },
          py::arg("text"))
      .def("dumps", [](const GbdtEnsemble& model) { return save_model(model); })
      .def(
          "save",
          [](const GbdtEnsemble& model, const std::filesystem::path& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw Error("cannot write " + path.string());
            save_model(model, out);
          },
          py::arg("path"))
      .def(
          "predict_proba",
          [](const GbdtEnsemble& model, const IndexArray& indptr, const IndexArray& indices, const ValueArray& data,
             unsigned threads) {
            auto matrix = from_csr(indptr, indices, data, model.num_features());
            std::vector<double> p;
            {
              py::gil_scoped_release release;
              p = model.predict_proba(matrix, threads);
            }
            return to_array(p);
          },
          py::arg("indptr"), py::arg("indices"), py::arg("data"), py::kw_only(), py::arg("threads") = 1)
      .def_property_readonly("num_trees", [](const GbdtEnsemble& model) { return model.trees.size(); })
      .def_property_readonly("num_features", &GbdtEnsemble::num_features)
      .def_property_readonly("params", [](const GbdtEnsemble& model) { return params_dict(model.params); });
}
