// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stylo/annotation.hpp"

namespace stylo {

struct DroppedDocument {
  std::size_t line = 0;  // 1-based input line (JSON-lines) or manifest line
  std::string id;        // may be empty when the id itself was unreadable
  std::string reason;
};

/// Dropped documents are excluded from every other count.
struct CorpusStats {
  std::size_t documents = 0;
  std::size_t tokens = 0;
  std::array<std::size_t, 2> labels{};
  std::size_t dropped = 0;
  std::vector<DroppedDocument> drops;
};

struct Corpus {
  std::vector<AnnotatedDocument> documents;
  CorpusStats stats;
};

/// Parses a single CoNLL-U document. NE tags are read from the MISC
/// attribute NE=<BIO tag>; multiword-token ranges and empty nodes are
/// skipped. Throws ParseError on format errors or if the result violates
/// any model invariant.
AnnotatedDocument parse_conllu(std::istream& in, std::string id, int label);

struct ManifestEntry {
  std::filesystem::path path;
  std::string id;
  int label = 0;
};

/// Lines of "path<TAB>id<TAB>label"; relative paths resolve against `base`.
std::vector<ManifestEntry> read_manifest(std::istream& in, const std::filesystem::path& base = {});

/// Parses every manifest entry (in parallel when threads != 1). Files that
/// fail to parse are dropped and counted. Output order = manifest order.
Corpus read_conllu_corpus(const std::filesystem::path& manifest, unsigned threads = 1);

/// Throws ParseError on malformed JSON; structurally invalid documents and
/// duplicate ids are dropped and counted.
Corpus read_jsonl_corpus(std::istream& in);

/// Writes one canonical JSON object per line. Returns the number written.
std::size_t write_jsonl_corpus(std::span<const AnnotatedDocument> docs, std::ostream& out);

/// Single-document JSON line (no trailing newline).
std::string document_to_json_line(const AnnotatedDocument& doc);

/// Loads a corpus from a .jsonl file, or from a CoNLL-U manifest for any
/// other extension.
Corpus load_corpus(const std::filesystem::path& path, unsigned threads = 1);

}  // namespace stylo
