// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stylo {

/// The 17 universal POS tags plus the tagger-specific SPACE token.
enum class Upos {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART,
  PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X, SPACE,
};

inline constexpr std::size_t kUposCount = 18;

std::string_view to_string(Upos tag);
std::optional<Upos> parse_upos(std::string_view text);

/// BIO named-entity tag. `type` is empty iff `kind == Outside`.
struct NeTag {
  enum class Kind { Outside, Begin, Inside };

  Kind kind = Kind::Outside;
  std::string type;

  static NeTag outside() { return {}; }
  static NeTag begin(std::string t) { return {Kind::Begin, std::move(t)}; }
  static NeTag inside(std::string t) { return {Kind::Inside, std::move(t)}; }

  bool is_entity() const { return kind != Kind::Outside; }
  bool operator==(const NeTag&) const = default;
};

/// Accepts "O", "B-<type>", "I-<type>" with a non-empty type.
std::optional<NeTag> parse_ne_tag(std::string_view text);
std::string to_string(const NeTag& tag);

using MorphFeature = std::pair<std::string, std::string>;

struct AnnotatedToken {
  /// In-sentence head index sentinel for the syntactic root.
  static constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

  std::string surface;
  std::string lemma;
  Upos upos = Upos::X;
  std::vector<MorphFeature> morph;  // sorted by key, unique keys
  std::size_t head = kRoot;         // 0-based within the sentence, or kRoot
  std::string deprel;
  NeTag ne;

  bool is_root() const { return head == kRoot; }
  bool operator==(const AnnotatedToken&) const = default;
};

struct Sentence {
  std::vector<AnnotatedToken> tokens;

  bool operator==(const Sentence&) const = default;
};

struct DocumentMeta {
  std::optional<std::string> source;
  std::optional<std::string> genre;
  std::optional<std::string> model;

  bool operator==(const DocumentMeta&) const = default;
};

/// Label 0 = human, 1 = machine. `meta` never reaches the classifier.
struct AnnotatedDocument {
  std::string id;
  int label = 0;
  DocumentMeta meta;
  std::vector<Sentence> sentences;

  bool operator==(const AnnotatedDocument&) const = default;
};

struct Violation {
  std::optional<std::size_t> sentence;
  std::optional<std::size_t> token;
  std::string rule;

  std::string describe() const;
};

/// Checks every structural invariant of the data model. An empty result
/// means the document is well formed.
std::vector<Violation> validate_document(const AnnotatedDocument& doc);

/// Per-sentence subset of validate_document (sentence index left unset).
std::vector<Violation> validate_sentence(const Sentence& sentence);

struct NeSpan {
  std::size_t start;  // inclusive
  std::size_t end;    // inclusive
  std::string type;

  bool operator==(const NeSpan&) const = default;
};

/// Maximal BIO spans, left to right. Throws stylo::Error naming the token
/// index on an I- tag that does not continue a span of the same type.
std::vector<NeSpan> ne_spans(const Sentence& sentence);

/// Sorts by key; returns false if a key occurs twice.
bool canonicalize_morph(std::vector<MorphFeature>& morph);

}  // namespace stylo
