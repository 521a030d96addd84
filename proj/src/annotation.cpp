// SPDX-License-Identifier: Apache-2.0

#include "stylo/annotation.hpp"

#include <algorithm>
#include <array>

#include "stylo/error.hpp"

namespace stylo {

namespace {

constexpr std::array<std::string_view, kUposCount> kUposNames = {
    "ADJ", "ADP", "ADV",  "AUX",   "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",    "SPACE",
};

// Characters reserved by the feature-key and vocabulary text formats.
bool has_reserved_char(std::string_view text) {
  return text.find_first_of(std::string_view("\x1f\t\n\r", 4)) != std::string_view::npos;
}

}  // namespace

std::string_view to_string(Upos tag) { return kUposNames[static_cast<std::size_t>(tag)]; }

std::optional<Upos> parse_upos(std::string_view text) {
  for (std::size_t i = 0; i < kUposNames.size(); ++i) {
    if (kUposNames[i] == text) return static_cast<Upos>(i);
  }
  return std::nullopt;
}

std::optional<NeTag> parse_ne_tag(std::string_view text) {
  if (text == "O") return NeTag::outside();
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  std::string type(text.substr(2));
  if (text[0] == 'B') return NeTag::begin(std::move(type));
  if (text[0] == 'I') return NeTag::inside(std::move(type));
  return std::nullopt;
}

std::string to_string(const NeTag& tag) {
  switch (tag.kind) {
    case NeTag::Kind::Begin: return "B-" + tag.type;
    case NeTag::Kind::Inside: return "I-" + tag.type;
    case NeTag::Kind::Outside: break;
  }
  return "O";
}

std::string Violation::describe() const {
  std::string out;
  if (sentence) out += "sentence " + std::to_string(*sentence) + ": ";
  if (token) out += "token " + std::to_string(*token) + ": ";
  return out + rule;
}

bool canonicalize_morph(std::vector<MorphFeature>& morph) {
  std::stable_sort(morph.begin(), morph.end(),
                   [](const MorphFeature& a, const MorphFeature& b) { return a.first < b.first; });
  return std::adjacent_find(morph.begin(), morph.end(), [](const auto& a, const auto& b) {
           return a.first == b.first;
         }) == morph.end();
}

std::vector<Violation> validate_sentence(const Sentence& sentence) {
  std::vector<Violation> out;
  const auto& tokens = sentence.tokens;
  const std::size_t n = tokens.size();
  if (n == 0) {
    out.push_back({std::nullopt, std::nullopt, "empty sentence"});
    return out;
  }

  std::size_t roots = 0;
  bool heads_in_range = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tok = tokens[i];
    if (tok.is_root()) {
      ++roots;
    } else if (tok.head == i) {
      out.push_back({std::nullopt, i, "self-headed token"});
      heads_in_range = false;
    } else if (tok.head >= n) {
      out.push_back({std::nullopt, i, "head out of range"});
      heads_in_range = false;
    }

    bool sorted = std::is_sorted(tok.morph.begin(), tok.morph.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
    bool unique = std::adjacent_find(tok.morph.begin(), tok.morph.end(), [](const auto& a, const auto& b) {
                    return a.first == b.first;
                  }) == tok.morph.end();
    if (!sorted || !unique) out.push_back({std::nullopt, i, "morph features not sorted by unique key"});

    bool reserved = has_reserved_char(tok.lemma) || has_reserved_char(tok.ne.type);
    for (const auto& [k, v] : tok.morph) reserved = reserved || has_reserved_char(k) || has_reserved_char(v);
    if (reserved) out.push_back({std::nullopt, i, "reserved control character in lemma, morph or entity type"});

    if (tok.ne.is_entity() && tok.ne.type.empty()) {
      out.push_back({std::nullopt, i, "entity tag without type"});
    }
    if (tok.ne.kind == NeTag::Kind::Inside) {
      bool continues = i > 0 && tokens[i - 1].ne.is_entity() && tokens[i - 1].ne.type == tok.ne.type;
      if (!continues) out.push_back({std::nullopt, i, "I- tag does not continue a span of the same type"});
    }
  }

  if (roots != 1) {
    out.push_back({std::nullopt, std::nullopt, "sentence must have exactly one root, found " + std::to_string(roots)});
  } else if (heads_in_range) {
    std::vector<std::vector<std::size_t>> children(n);
    std::size_t root = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (tokens[i].is_root()) {
        root = i;
      } else {
        children[tokens[i].head].push_back(i);
      }
    }
    std::vector<std::size_t> stack{root};
    std::size_t reached = 0;
    while (!stack.empty()) {
      std::size_t cur = stack.back();
      stack.pop_back();
      ++reached;
      stack.insert(stack.end(), children[cur].begin(), children[cur].end());
    }
    if (reached != n) out.push_back({std::nullopt, std::nullopt, "dependency graph is not a tree"});
  }
  return out;
}

std::vector<Violation> validate_document(const AnnotatedDocument& doc) {
  std::vector<Violation> out;
  if (doc.id.empty()) out.push_back({std::nullopt, std::nullopt, "empty document id"});
  if (doc.label != 0 && doc.label != 1) out.push_back({std::nullopt, std::nullopt, "label must be 0 or 1"});
  if (doc.sentences.empty()) out.push_back({std::nullopt, std::nullopt, "document has no sentences"});
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    for (auto v : validate_sentence(doc.sentences[s])) {
      v.sentence = s;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<NeSpan> ne_spans(const Sentence& sentence) {
  std::vector<NeSpan> spans;
  const auto& tokens = sentence.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const NeTag& tag = tokens[i].ne;
    switch (tag.kind) {
      case NeTag::Kind::Outside:
        break;
      case NeTag::Kind::Begin:
        spans.push_back({i, i, tag.type});
        break;
      case NeTag::Kind::Inside:
        if (spans.empty() || spans.back().end + 1 != i || spans.back().type != tag.type) {
          throw Error("malformed BIO sequence at token " + std::to_string(i));
        }
        spans.back().end = i;
        break;
    }
  }
  return spans;
}

}  // namespace stylo
