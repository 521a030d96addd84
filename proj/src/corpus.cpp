// SPDX-License-Identifier: Apache-2.0

#include "stylo/corpus.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "stylo/error.hpp"
#include "stylo/parallel.hpp"

namespace stylo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<MorphFeature> parse_morph_pair(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) return std::nullopt;
  return MorphFeature{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Raised while decoding one JSON document; turns into a drop, not a failure.
struct DropReason {
  std::string reason;
};

const ordered_json& require(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DropReason{std::string("missing \"") + key + "\""};
  return *it;
}

std::string require_string(const ordered_json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw DropReason{std::string("\"") + key + "\" must be a string"};
  return v.get<std::string>();
}

AnnotatedToken token_from_json(const ordered_json& j) {
  if (!j.is_object()) throw DropReason{"token must be an object"};
  AnnotatedToken tok;
  tok.surface = require_string(j, "surface");
  tok.lemma = require_string(j, "lemma");
  auto upos = parse_upos(require_string(j, "upos"));
  if (!upos) throw DropReason{"unknown upos tag"};
  tok.upos = *upos;

  const auto& morph = require(j, "morph");
  if (!morph.is_array()) throw DropReason{"\"morph\" must be an array"};
  for (const auto& m : morph) {
    if (!m.is_string()) throw DropReason{"morph entries must be strings"};
    auto pair = parse_morph_pair(m.get_ref<const std::string&>());
    if (!pair) throw DropReason{"morph entry is not Key=Value"};
    tok.morph.push_back(std::move(*pair));
  }
  if (!canonicalize_morph(tok.morph)) throw DropReason{"duplicate morph key"};

  const auto& head = require(j, "head");
  if (!head.is_number_integer()) throw DropReason{"\"head\" must be an integer"};
  auto h = head.get<long long>();
  if (h < 0) throw DropReason{"negative head"};
  tok.head = h == 0 ? AnnotatedToken::kRoot : static_cast<std::size_t>(h - 1);

  tok.deprel = require_string(j, "deprel");
  auto ne = parse_ne_tag(require_string(j, "ne"));
  if (!ne) throw DropReason{"malformed ne tag"};
  tok.ne = std::move(*ne);
  return tok;
}

AnnotatedDocument document_from_json(const ordered_json& j) {
  if (!j.is_object()) throw DropReason{"line is not a JSON object"};
  AnnotatedDocument doc;
  doc.id = require_string(j, "id");
  const auto& label = require(j, "label");
  if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
    throw DropReason{"\"label\" must be 0 or 1"};
  }
  doc.label = label.get<int>();

  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw DropReason{"\"meta\" must be an object"};
    auto read_opt = [&](const char* key, std::optional<std::string>& dst) {
      auto f = it->find(key);
      if (f == it->end() || f->is_null()) return;
      if (!f->is_string()) throw DropReason{std::string("meta \"") + key + "\" must be a string"};
      dst = f->get<std::string>();
    };
    read_opt("source", doc.meta.source);
    read_opt("genre", doc.meta.genre);
    read_opt("model", doc.meta.model);
  }

  const auto& sentences = require(j, "sentences");
  if (!sentences.is_array()) throw DropReason{"\"sentences\" must be an array"};
  for (const auto& s : sentences) {
    if (!s.is_array()) throw DropReason{"sentence must be an array"};
    Sentence sentence;
    for (const auto& t : s) sentence.tokens.push_back(token_from_json(t));
    doc.sentences.push_back(std::move(sentence));
  }

  auto violations = validate_document(doc);
  if (!violations.empty()) throw DropReason{violations.front().describe()};
  return doc;
}

ordered_json document_to_json(const AnnotatedDocument& doc) {
  ordered_json meta = ordered_json::object();
  if (doc.meta.source) meta["source"] = *doc.meta.source;
  if (doc.meta.genre) meta["genre"] = *doc.meta.genre;
  if (doc.meta.model) meta["model"] = *doc.meta.model;

  ordered_json sentences = ordered_json::array();
  for (const auto& sentence : doc.sentences) {
    ordered_json tokens = ordered_json::array();
    for (const auto& tok : sentence.tokens) {
      ordered_json morph = ordered_json::array();
      for (const auto& [k, v] : tok.morph) morph.push_back(k + "=" + v);
      ordered_json t;
      t["surface"] = tok.surface;
      t["lemma"] = tok.lemma;
      t["upos"] = std::string(to_string(tok.upos));
      t["morph"] = std::move(morph);
      t["head"] = tok.is_root() ? 0 : static_cast<long long>(tok.head) + 1;
      t["deprel"] = tok.deprel;
      t["ne"] = to_string(tok.ne);
      tokens.push_back(std::move(t));
    }
    sentences.push_back(std::move(tokens));
  }

  ordered_json j;
  j["id"] = doc.id;
  j["label"] = doc.label;
  j["meta"] = std::move(meta);
  j["sentences"] = std::move(sentences);
  return j;
}

std::size_t count_tokens(const AnnotatedDocument& doc) {
  std::size_t n = 0;
  for (const auto& s : doc.sentences) n += s.tokens.size();
  return n;
}

void accept(Corpus& corpus, AnnotatedDocument doc) {
  corpus.stats.documents += 1;
  corpus.stats.tokens += count_tokens(doc);
  corpus.stats.labels[static_cast<std::size_t>(doc.label)] += 1;
  corpus.documents.push_back(std::move(doc));
}

void drop(Corpus& corpus, std::size_t line, std::string id, std::string reason) {
  corpus.stats.dropped += 1;
  corpus.stats.drops.push_back({line, std::move(id), std::move(reason)});
}

}  // namespace

AnnotatedDocument parse_conllu(std::istream& in, std::string id, int label) {
  AnnotatedDocument doc;
  doc.id = std::move(id);
  doc.label = label;

  Sentence current;
  std::vector<std::size_t> head_lines;  // source line per token, for range errors
  std::vector<long long> raw_heads;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    const auto n = current.tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
      long long h = raw_heads[i];
      if (h < 0 || static_cast<std::size_t>(h) > n) throw ParseError(head_lines[i], "head out of range");
      current.tokens[i].head = h == 0 ? AnnotatedToken::kRoot : static_cast<std::size_t>(h - 1);
    }
    doc.sentences.push_back(std::move(current));
    current = Sentence{};
    head_lines.clear();
    raw_heads.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(lineno, "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;  // multiword range / empty node
    auto tok_id = parse_int<long long>(cols[0]);
    if (!tok_id || *tok_id != static_cast<long long>(current.tokens.size()) + 1) {
      throw ParseError(lineno, "unexpected token id '" + std::string(cols[0]) + "'");
    }

    AnnotatedToken tok;
    tok.surface = std::string(cols[1]);
    tok.lemma = std::string(cols[2]);
    auto upos = parse_upos(cols[3]);
    if (!upos) throw ParseError(lineno, "unknown UPOS tag '" + std::string(cols[3]) + "'");
    tok.upos = *upos;
    if (cols[5] != "_") {
      for (auto part : split(cols[5], '|')) {
        auto pair = parse_morph_pair(part);
        if (!pair) throw ParseError(lineno, "malformed FEATS entry '" + std::string(part) + "'");
        tok.morph.push_back(std::move(*pair));
      }
      if (!canonicalize_morph(tok.morph)) throw ParseError(lineno, "duplicate FEATS key");
    }
    auto head = parse_int<long long>(cols[6]);
    if (!head) throw ParseError(lineno, "non-numeric HEAD '" + std::string(cols[6]) + "'");
    tok.deprel = std::string(cols[7]);
    if (cols[9] != "_") {
      for (auto attr : split(cols[9], '|')) {
        if (attr.starts_with("NE=")) {
          auto ne = parse_ne_tag(attr.substr(3));
          if (!ne) throw ParseError(lineno, "malformed NE tag '" + std::string(attr.substr(3)) + "'");
          tok.ne = std::move(*ne);
        }
      }
    }
    current.tokens.push_back(std::move(tok));
    raw_heads.push_back(*head);
    head_lines.push_back(lineno);
  }
  if (in.bad()) throw Error("read failure in CoNLL-U stream");
  flush();

  auto violations = validate_document(doc);
  if (!violations.empty()) throw ParseError(0, "invalid document '" + doc.id + "': " + violations.front().describe());
  return doc;
}

std::vector<ManifestEntry> read_manifest(std::istream& in, const std::filesystem::path& base) {
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw ParseError(lineno, "manifest line must be path<TAB>id<TAB>label");
    auto label = parse_int<int>(cols[2]);
    if (!label || (*label != 0 && *label != 1)) throw ParseError(lineno, "label must be 0 or 1");
    std::filesystem::path p{std::string(cols[0])};
    if (p.is_relative() && !base.empty()) p = base / p;
    entries.push_back({std::move(p), std::string(cols[1]), *label});
  }
  return entries;
}

Corpus read_conllu_corpus(const std::filesystem::path& manifest, unsigned threads) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open manifest " + manifest.string());
  auto entries = read_manifest(in, manifest.parent_path());

  struct Outcome {
    std::optional<AnnotatedDocument> doc;
    std::string error;
  };
  std::vector<Outcome> outcomes(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    std::ifstream file(entries[i].path);
    if (!file) {
      outcomes[i].error = "cannot open " + entries[i].path.string();
      return;
    }
    try {
      outcomes[i].doc = parse_conllu(file, entries[i].id, entries[i].label);
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  });

  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!outcomes[i].doc) {
      drop(corpus, i + 1, entries[i].id, outcomes[i].error);
    } else if (!seen.insert(entries[i].id).second) {
      drop(corpus, i + 1, entries[i].id, "duplicate id");
    } else {
      accept(corpus, std::move(*outcomes[i].doc));
    }
  }
  return corpus;
}

Corpus read_jsonl_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    std::string id;
    if (j.is_object()) {
      if (auto it = j.find("id"); it != j.end() && it->is_string()) id = it->get<std::string>();
    }
    try {
      auto doc = document_from_json(j);
      if (!seen.insert(doc.id).second) throw DropReason{"duplicate id"};
      accept(corpus, std::move(doc));
    } catch (const DropReason& d) {
      drop(corpus, lineno, std::move(id), d.reason);
    }
  }
  if (in.bad()) throw Error("read failure in JSON-lines stream");
  return corpus;
}

std::string document_to_json_line(const AnnotatedDocument& doc) {
  try {
    return document_to_json(doc).dump();
  } catch (const nlohmann::json::type_error& e) {
    throw Error("cannot serialize document '" + doc.id + "': " + e.what());
  }
}

std::size_t write_jsonl_corpus(std::span<const AnnotatedDocument> docs, std::ostream& out) {
  for (const auto& doc : docs) out << document_to_json_line(doc) << '\n';
  out.flush();
  if (!out) throw Error("write failure while writing corpus");
  return docs.size();
}

Corpus load_corpus(const std::filesystem::path& path, unsigned threads) {
  if (path.extension() == ".jsonl") {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus " + path.string());
    return read_jsonl_corpus(in);
  }
  return read_conllu_corpus(path, threads);
}

}  // namespace stylo
