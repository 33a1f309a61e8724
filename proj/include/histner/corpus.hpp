#pragma once

// Core domain types shared across the toolkit: labels, tokens, sentences,
// corpora, tag schemes, and entity spans, plus the scheme validation /
// extraction / emission primitives everything else is built from.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "histner/utf8.hpp"

namespace histner {

enum class EntityType : std::uint8_t { PER, ORG, LOC, MISC };

inline constexpr EntityType kEntityTypes[] = {EntityType::PER, EntityType::ORG,
                                              EntityType::LOC, EntityType::MISC};

inline std::string_view to_string(EntityType t) {
  switch (t) {
    case EntityType::PER: return "PER";
    case EntityType::ORG: return "ORG";
    case EntityType::LOC: return "LOC";
    case EntityType::MISC: return "MISC";
  }
  return "?";
}

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
  if (s == "PER") return EntityType::PER;
  if (s == "ORG") return EntityType::ORG;
  if (s == "LOC") return EntityType::LOC;
  if (s == "MISC") return EntityType::MISC;
  return std::nullopt;
}

/// Chunk-labeling schemes. IO has no B- tags at all; IOB1 uses B- only to
/// separate adjacent same-type entities; IOB2 opens every entity with B-.
enum class TagScheme : std::uint8_t { IO, IOB1, IOB2 };

inline std::string_view to_string(TagScheme s) {
  switch (s) {
    case TagScheme::IO: return "IO";
    case TagScheme::IOB1: return "IOB1";
    case TagScheme::IOB2: return "IOB2";
  }
  return "?";
}

inline std::optional<TagScheme> parse_tag_scheme(std::string_view s) {
  if (s == "IO" || s == "io") return TagScheme::IO;
  if (s == "IOB1" || s == "iob1") return TagScheme::IOB1;
  if (s == "IOB2" || s == "iob2") return TagScheme::IOB2;
  return std::nullopt;
}

/// One token label: O, I-<TYPE> or B-<TYPE>. Outside labels never carry a
/// type; Inside/Begin always do.
class Label {
 public:
  enum class Kind : std::uint8_t { Outside, Inside, Begin };

  Label() : kind_(Kind::Outside), type_(EntityType::PER) {}

  static Label outside() { return Label(); }
  static Label inside(EntityType t) { return Label(Kind::Inside, t); }
  static Label begin(EntityType t) { return Label(Kind::Begin, t); }

  Kind kind() const { return kind_; }
  bool is_outside() const { return kind_ == Kind::Outside; }
  bool is_inside() const { return kind_ == Kind::Inside; }
  bool is_begin() const { return kind_ == Kind::Begin; }

  EntityType type() const {
    if (is_outside()) throw std::logic_error("Outside label has no entity type");
    return type_;
  }

  /// True when this label is part of an entity of type t.
  bool is_entity(EntityType t) const { return !is_outside() && type_ == t; }

  std::string to_string() const {
    if (is_outside()) return "O";
    std::string s(is_begin() ? "B-" : "I-");
    s += histner::to_string(type_);
    return s;
  }

  static std::optional<Label> from_string(std::string_view s) {
    if (s == "O") return outside();
    if (s.size() < 3 || s[1] != '-') return std::nullopt;
    auto t = parse_entity_type(s.substr(2));
    if (!t) return std::nullopt;
    if (s[0] == 'I') return inside(*t);
    if (s[0] == 'B') return begin(*t);
    return std::nullopt;
  }

  friend bool operator==(const Label& a, const Label& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ == Kind::Outside || a.type_ == b.type_;
  }

 private:
  Label(Kind k, EntityType t) : kind_(k), type_(t) {}

  Kind kind_;
  EntityType type_;
};

struct Token {
  std::string surface;      // non-empty, no whitespace
  Label label;
  bool ocr_error = false;   // set by noisification / tag transfer

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  TagScheme scheme = TagScheme::IOB1;
  std::string language;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// A typed chunk over token indices; token_end is inclusive.
struct EntitySpan {
  std::size_t sentence_index = 0;
  std::size_t token_start = 0;
  std::size_t token_end = 0;
  EntityType type = EntityType::PER;

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

// ---------------------------------------------------------------------------
// Scheme validation

/// Returns the index of the first label violating `scheme`, or nullopt if the
/// sequence is valid.
inline std::optional<std::size_t> first_invalid_label(const std::vector<Label>& labels,
                                                      TagScheme scheme) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label& cur = labels[i];
    if (cur.is_outside()) continue;
    const Label* prev = i > 0 ? &labels[i - 1] : nullptr;
    switch (scheme) {
      case TagScheme::IO:
        if (cur.is_begin()) return i;
        break;
      case TagScheme::IOB1:
        // B-X only directly after a token of the same type X.
        if (cur.is_begin() && !(prev && prev->is_entity(cur.type()))) return i;
        break;
      case TagScheme::IOB2:
        // I-X only continues a same-type entity.
        if (cur.is_inside() && !(prev && prev->is_entity(cur.type()))) return i;
        break;
    }
  }
  return std::nullopt;
}

inline std::vector<Label> sentence_labels(const Sentence& sentence) {
  std::vector<Label> labels;
  labels.reserve(sentence.size());
  for (const auto& t : sentence.tokens) labels.push_back(t.label);
  return labels;
}

inline bool validate_labels(const std::vector<Label>& labels, TagScheme scheme) {
  return !first_invalid_label(labels, scheme).has_value();
}

inline bool validate_corpus(const Corpus& corpus) {
  for (const auto& s : corpus.sentences) {
    if (s.tokens.empty()) return false;
    if (!validate_labels(sentence_labels(s), corpus.scheme)) return false;
  }
  return true;
}

/// Coerces an arbitrary label sequence into the nearest valid one under
/// `scheme` (invalid B -> I under IOB1/IO, invalid I -> B under IOB2).
/// Returns the number of labels changed.
inline std::size_t repair_labels(std::vector<Label>& labels, TagScheme scheme) {
  std::size_t repaired = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Label& cur = labels[i];
    if (cur.is_outside()) continue;
    const Label* prev = i > 0 ? &labels[i - 1] : nullptr;
    const bool continues = prev && prev->is_entity(cur.type());
    switch (scheme) {
      case TagScheme::IO:
        if (cur.is_begin()) { cur = Label::inside(cur.type()); ++repaired; }
        break;
      case TagScheme::IOB1:
        if (cur.is_begin() && !continues) { cur = Label::inside(cur.type()); ++repaired; }
        break;
      case TagScheme::IOB2:
        if (cur.is_inside() && !continues) { cur = Label::begin(cur.type()); ++repaired; }
        break;
    }
  }
  return repaired;
}

// ---------------------------------------------------------------------------
// Entity extraction and label emission

/// Extracts typed spans from one sentence. Throws std::invalid_argument when
/// the label sequence is not valid under `scheme`.
inline std::vector<EntitySpan> extract_entities(const Sentence& sentence, TagScheme scheme,
                                                std::size_t sentence_index = 0) {
  const auto labels = sentence_labels(sentence);
  if (auto bad = first_invalid_label(labels, scheme)) {
    throw std::invalid_argument("invalid " + std::string(to_string(scheme)) +
                                " label sequence at token " + std::to_string(*bad) +
                                " of sentence " + std::to_string(sentence_index));
  }
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&] {
    if (open) { spans.push_back(*open); open.reset(); }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label& cur = labels[i];
    if (cur.is_outside()) {
      close();
      continue;
    }
    const bool starts_new =
        cur.is_begin() || !open || open->type != cur.type();
    if (starts_new) {
      close();
      open = EntitySpan{sentence_index, i, i, cur.type()};
    } else {
      open->token_end = i;
    }
  }
  close();
  return spans;
}

inline std::vector<EntitySpan> extract_all_entities(const Corpus& corpus) {
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    auto s = extract_entities(corpus.sentences[i], corpus.scheme, i);
    spans.insert(spans.end(), s.begin(), s.end());
  }
  return spans;
}

/// Renders disjoint, sorted spans back into a label sequence under `scheme`.
/// Under IOB1 a span opens with B- exactly when it starts right after a
/// same-type span; under IO adjacent same-type spans merge (lossy).
inline std::vector<Label> labels_from_spans(const std::vector<EntitySpan>& spans,
                                            std::size_t n_tokens, TagScheme scheme) {
  std::vector<Label> labels(n_tokens, Label::outside());
  const EntitySpan* prev = nullptr;
  for (const auto& span : spans) {
    for (std::size_t i = span.token_start; i <= span.token_end; ++i)
      labels[i] = Label::inside(span.type);
    const bool adjacent_same =
        prev && prev->type == span.type && prev->token_end + 1 == span.token_start;
    switch (scheme) {
      case TagScheme::IO:
        break;
      case TagScheme::IOB1:
        if (adjacent_same) labels[span.token_start] = Label::begin(span.type);
        break;
      case TagScheme::IOB2:
        labels[span.token_start] = Label::begin(span.type);
        break;
    }
    prev = &span;
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Plain-text serialization (the shape the noise channels and aligner see)

/// Tokens joined by single spaces; no labels.
inline std::u32string sentence_text(const Sentence& sentence) {
  std::u32string out;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (i > 0) out.push_back(U' ');
    out += decode_utf8(sentence.tokens[i].surface);
  }
  return out;
}

/// One line per sentence, each terminated by '\n'.
inline std::u32string corpus_text(const Corpus& corpus) {
  std::u32string out;
  for (const auto& s : corpus.sentences) {
    out += sentence_text(s);
    out.push_back(U'\n');
  }
  return out;
}

}  // namespace histner
