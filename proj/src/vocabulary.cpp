// SPDX-License-Identifier: Apache-2.0

#include "stylo/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "stylo/error.hpp"
#include "stylo/hexfloat.hpp"

namespace stylo {

namespace {

constexpr std::string_view kHeaderTag = "#stylo-vocab";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  while (true) {
    auto pos = line.find('\t');
    cols.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) return cols;
    line.remove_prefix(pos + 1);
  }
}

template <class Int>
std::optional<Int> parse_uint(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void check_threshold(std::optional<double> t, const char* name) {
  if (t && !(*t > 0.0 && *t <= 1.0)) throw Error(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

Vocabulary::Vocabulary(std::vector<VocabEntry> entries, std::size_t corpus_size, std::size_t class_cap,
                       Culling culling)
    : entries_(std::move(entries)), corpus_size_(corpus_size), class_cap_(class_cap), culling_(culling) {
  lookup_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].index = i;
    if (!lookup_.emplace(entries_[i].key, i).second) throw Error("duplicate vocabulary key");
  }
}

std::optional<std::size_t> Vocabulary::index_of(const FeatureKey& key) const {
  auto it = lookup_.find(key);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::class_size(FeatureClass cls) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [cls](const VocabEntry& e) { return e.key.cls == cls; }));
}

void VocabularyBuilder::add(std::string_view doc_id, const FeatureBag& bag) {
  if (!ids_.emplace(doc_id).second) throw Error("document '" + std::string(doc_id) + "' added twice");
  for (const auto& [key, n] : bag.counts()) {
    auto& s = stats_[key];
    s.count += n;
    s.docs += 1;
  }
}

void VocabularyBuilder::merge(const VocabularyBuilder& other) {
  for (const auto& id : other.ids_) {
    if (!ids_.insert(id).second) throw Error("document '" + id + "' present in two shards");
  }
  for (const auto& [key, s] : other.stats_) {
    auto& mine = stats_[key];
    mine.count += s.count;
    mine.docs += s.docs;
  }
}

Vocabulary VocabularyBuilder::build(std::size_t corpus_size, std::size_t class_cap) const {
  if (ids_.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  if (corpus_size < ids_.size()) throw Error("corpus size smaller than the number of documents seen");

  std::array<std::vector<VocabEntry>, kFeatureClassCount> per_class;
  for (const auto& [key, s] : stats_) {
    per_class[static_cast<std::size_t>(key.cls)].push_back(
        {key, 0, s.count, static_cast<double>(s.docs) / static_cast<double>(corpus_size)});
  }

  std::vector<VocabEntry> entries;
  for (auto& bucket : per_class) {
    auto by_rank = [](const VocabEntry& a, const VocabEntry& b) {
      if (a.corpus_count != b.corpus_count) return a.corpus_count > b.corpus_count;
      return a.key < b.key;
    };
    std::size_t keep = std::min(class_cap, bucket.size());
    std::partial_sort(bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(keep), bucket.end(), by_rank);
    entries.insert(entries.end(), std::make_move_iterator(bucket.begin()),
                   std::make_move_iterator(bucket.begin() + static_cast<std::ptrdiff_t>(keep)));
  }
  return Vocabulary(std::move(entries), corpus_size, class_cap, {});
}

Vocabulary build_vocabulary(std::span<const FeatureBag> bags, std::size_t class_cap) {
  VocabularyBuilder builder;
  for (std::size_t i = 0; i < bags.size(); ++i) builder.add(std::to_string(i), bags[i]);
  return builder.build(bags.size(), class_cap);
}

Vocabulary apply_culling(const Vocabulary& vocab, std::optional<double> min_df, std::optional<double> max_df) {
  check_threshold(min_df, "min_df");
  check_threshold(max_df, "max_df");
  if (min_df && max_df && *min_df > *max_df) throw Error("min_df must not exceed max_df");

  std::vector<VocabEntry> kept;
  for (const auto& e : vocab.entries()) {
    if (min_df && e.doc_freq < *min_df) continue;
    if (max_df && e.doc_freq > *max_df) continue;
    kept.push_back(e);
  }
  Culling culling = vocab.culling();
  if (min_df) culling.min_df = culling.min_df ? std::max(*culling.min_df, *min_df) : *min_df;
  if (max_df) culling.max_df = culling.max_df ? std::min(*culling.max_df, *max_df) : *max_df;
  return Vocabulary(std::move(kept), vocab.corpus_size(), vocab.class_cap(), culling);
}

void save_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? format_hex(*v) : std::string("-"); };
  out << kHeaderTag << "\tcorpus_size=" << vocab.corpus_size() << "\tclass_cap=" << vocab.class_cap()
      << "\tmin_df=" << opt(vocab.culling().min_df) << "\tmax_df=" << opt(vocab.culling().max_df) << '\n';
  for (const auto& e : vocab.entries()) {
    out << to_string(e.key.cls) << '\t' << static_cast<int>(e.key.order) << '\t' << e.key.text << '\t'
        << e.corpus_count << '\t' << format_hex(e.doc_freq) << '\n';
  }
  out.flush();
  if (!out) throw Error("write failure while saving vocabulary");
}

Vocabulary load_vocabulary(std::istream& in, bool allow_empty) {
  std::size_t corpus_size = 0;
  std::size_t class_cap = kDefaultClassCap;
  Culling culling;
  std::vector<VocabEntry> entries;
  std::unordered_set<FeatureKey, FeatureKeyHash> seen;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);

    if (cols[0] == kHeaderTag) {
      if (lineno != 1) throw ParseError(lineno, "header must be the first line");
      for (std::size_t i = 1; i < cols.size(); ++i) {
        auto eq = cols[i].find('=');
        if (eq == std::string_view::npos) throw ParseError(lineno, "malformed header field");
        auto name = cols[i].substr(0, eq);
        auto value = cols[i].substr(eq + 1);
        auto read_df = [&](std::optional<double>& dst) {
          if (value == "-") return;
          dst = parse_double(value);
          if (!dst) throw ParseError(lineno, "malformed threshold");
        };
        if (name == "corpus_size") {
          auto v = parse_uint<std::size_t>(value);
          if (!v) throw ParseError(lineno, "malformed corpus_size");
          corpus_size = *v;
        } else if (name == "class_cap") {
          auto v = parse_uint<std::size_t>(value);
          if (!v) throw ParseError(lineno, "malformed class_cap");
          class_cap = *v;
        } else if (name == "min_df") {
          read_df(culling.min_df);
        } else if (name == "max_df") {
          read_df(culling.max_df);
        } else {
          throw ParseError(lineno, "unknown header field '" + std::string(name) + "'");
        }
      }
      continue;
    }

    if (cols.size() != 5) throw ParseError(lineno, "expected 5 tab-separated columns");
    auto cls = parse_feature_class(cols[0]);
    if (!cls) throw ParseError(lineno, "unknown feature class '" + std::string(cols[0]) + "'");
    auto order = parse_uint<std::size_t>(cols[1]);
    if (!order || !valid_order(*cls, *order)) throw ParseError(lineno, "invalid n-gram order");
    FeatureKey key{*cls, static_cast<std::uint8_t>(*order), std::string(cols[2])};
    if (key.components().size() != *order) throw ParseError(lineno, "component count does not match order");
    auto count = parse_uint<std::uint64_t>(cols[3]);
    if (!count) throw ParseError(lineno, "malformed corpus count");
    auto df = parse_double(cols[4]);
    if (!df || !(*df > 0.0 && *df <= 1.0)) throw ParseError(lineno, "document frequency must lie in (0, 1]");
    if (!seen.insert(key).second) throw ParseError(lineno, "duplicate key");
    entries.push_back({std::move(key), entries.size(), *count, *df});
  }
  if (in.bad()) throw Error("read failure while loading vocabulary");
  if (entries.empty() && !allow_empty) throw Error("vocabulary file is empty");
  return Vocabulary(std::move(entries), corpus_size, class_cap, culling);
}

}  // namespace stylo
