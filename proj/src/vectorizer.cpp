// SPDX-License-Identifier: Apache-2.0

#include "stylo/vectorizer.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "stylo/error.hpp"
#include "stylo/hexfloat.hpp"
#include "stylo/parallel.hpp"

namespace stylo {

namespace {

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

double SparseVector::value(std::size_t column) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), column);
  if (it == indices.end() || *it != column) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

void FeatureMatrix::add_row(std::string id, int label, SparseVector row) {
  if (row.dimension != dimension) throw Error("row dimension does not match matrix dimension");
  ids.push_back(std::move(id));
  labels.push_back(label);
  rows.push_back(std::move(row));
}

SparseVector vectorize(const FeatureBag& bag, const Vocabulary& vocab) {
  if (vocab.empty()) throw Error("cannot vectorize against an empty vocabulary");
  std::vector<std::pair<std::uint32_t, double>> cells;
  for (const auto& [key, n] : bag.counts()) {
    auto idx = vocab.index_of(key);
    if (!idx) continue;
    auto total = bag.total(key.cls, key.order);
    cells.emplace_back(static_cast<std::uint32_t>(*idx), static_cast<double>(n) / static_cast<double>(total));
  }
  std::sort(cells.begin(), cells.end());

  SparseVector out;
  out.dimension = vocab.size();
  out.indices.reserve(cells.size());
  out.values.reserve(cells.size());
  for (const auto& [i, v] : cells) {
    out.indices.push_back(i);
    out.values.push_back(v);
  }
  return out;
}

FeatureMatrix assemble_matrix(std::span<const AnnotatedDocument> docs, const Vocabulary& vocab, unsigned threads) {
  if (docs.empty()) throw Error("empty corpus");
  if (vocab.empty()) throw Error("cannot vectorize against an empty vocabulary");
  std::unordered_set<std::string_view> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.id).second) throw Error("duplicate document id '" + d.id + "'");
  }

  std::vector<SparseVector> rows(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { rows[i] = vectorize(extract_all(docs[i]), vocab); });

  FeatureMatrix m;
  m.dimension = vocab.size();
  for (std::size_t i = 0; i < docs.size(); ++i) m.add_row(docs[i].id, docs[i].label, std::move(rows[i]));
  return m;
}

void save_matrix(const FeatureMatrix& matrix, std::ostream& out) {
  out << matrix.dimension << '\t' << matrix.size() << '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    out << matrix.ids[r] << '\t' << matrix.labels[r] << '\t';
    const auto& row = matrix.rows[r];
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      if (k) out << ',';
      out << row.indices[k] << ':' << format_hex(row.values[k]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw Error("write failure while saving matrix");
}

FeatureMatrix load_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing matrix header");
  auto tab = line.find('\t');
  auto dim = tab == std::string::npos ? std::nullopt : parse_int<std::size_t>(std::string_view(line).substr(0, tab));
  auto rows = tab == std::string::npos ? std::nullopt : parse_int<std::size_t>(std::string_view(line).substr(tab + 1));
  if (!dim || !rows) throw ParseError(1, "matrix header must be V<TAB>rows");

  FeatureMatrix m;
  m.dimension = *dim;
  std::size_t lineno = 1;
  while (m.size() < *rows) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "matrix truncated");
    ++lineno;
    std::string_view view(line);
    auto t1 = view.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : view.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw ParseError(lineno, "row must be id<TAB>label<TAB>entries");
    auto label = parse_int<int>(view.substr(t1 + 1, t2 - t1 - 1));
    if (!label) throw ParseError(lineno, "malformed label");

    SparseVector row;
    row.dimension = m.dimension;
    std::string_view cells = view.substr(t2 + 1);
    while (!cells.empty()) {
      auto comma = cells.find(',');
      auto cell = cells.substr(0, comma);
      auto colon = cell.find(':');
      auto idx = colon == std::string_view::npos ? std::nullopt : parse_int<std::uint32_t>(cell.substr(0, colon));
      auto val = colon == std::string_view::npos ? std::nullopt : parse_double(cell.substr(colon + 1));
      if (!idx || !val) throw ParseError(lineno, "malformed entry '" + std::string(cell) + "'");
      if (*idx >= m.dimension || (!row.indices.empty() && *idx <= row.indices.back())) {
        throw ParseError(lineno, "column indices must be increasing and below V");
      }
      row.indices.push_back(*idx);
      row.values.push_back(*val);
      if (comma == std::string_view::npos) break;
      cells.remove_prefix(comma + 1);
    }
    m.add_row(std::string(view.substr(0, t1)), *label, std::move(row));
  }
  return m;
}

}  // namespace stylo
