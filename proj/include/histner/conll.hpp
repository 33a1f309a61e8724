#pragma once

// CoNLL-format reading/writing and the corpus-preparation transforms:
// tag-scheme conversion, tag-set mapping, contiguous splitting, seeded
// sentence-wise downsampling, and corpus statistics.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "histner/corpus.hpp"
#include "histner/rng.hpp"

namespace histner {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ColumnSpec {
  enum class Separator : std::uint8_t { Whitespace, Tab };

  std::size_t token_column = 0;
  std::size_t label_column = 1;
  std::optional<std::size_t> flag_column;  // optional 0/1 ocr_error column
  Separator separator = Separator::Whitespace;
};

struct ParseOptions {
  ColumnSpec columns;
  std::optional<TagScheme> scheme;  // force instead of auto-detecting
  bool repair = false;              // coerce invalid label sequences
  std::string language;
};

struct ParseStats {
  TagScheme detected_scheme = TagScheme::IOB1;
  std::size_t repaired_labels = 0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  ColumnSpec::Separator sep) {
  std::vector<std::string_view> fields;
  if (sep == ColumnSpec::Separator::Tab) {
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find('\t', start);
      if (pos == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
  }
  return fields;
}

inline bool is_blank_line(std::string_view line) {
  for (char c : line)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

}  // namespace detail

/// Parses CoNLL text: one token per line, blank line ends a sentence,
/// "-DOCSTART-" lines skipped. The tag scheme is auto-detected by validating
/// against IOB1, then IOB2, then IO, unless `options.scheme` forces one.
/// Invalid label sequences are a hard error unless `options.repair` is set,
/// in which case they are coerced and counted in `stats`.
inline Corpus parse_conll(std::string_view text, const ParseOptions& options = {},
                          ParseStats* stats = nullptr) {
  const auto& cols = options.columns;
  std::size_t need = std::max(cols.token_column, cols.label_column);
  if (cols.flag_column) need = std::max(need, *cols.flag_column);

  Corpus corpus;
  corpus.language = options.language;
  Sentence current;
  std::vector<std::vector<std::size_t>> token_lines;  // per sentence, per token
  std::vector<std::size_t> current_lines;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      corpus.sentences.push_back(std::move(current));
      token_lines.push_back(std::move(current_lines));
      current = Sentence{};
      current_lines.clear();
    }
  };
  while (pos <= text.size()) {
    if (pos == text.size()) {
      flush();
      break;
    }
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;

    if (detail::is_blank_line(line)) {
      flush();
      continue;
    }
    if (line.starts_with("-DOCSTART-")) continue;

    auto fields = detail::split_fields(line, cols.separator);
    if (fields.size() <= need) {
      throw ParseError(line_no, "expected at least " + std::to_string(need + 1) +
                                    " columns, got " + std::to_string(fields.size()));
    }
    std::string_view surface = fields[cols.token_column];
    if (surface.empty()) throw ParseError(line_no, "empty token field");
    auto label = Label::from_string(fields[cols.label_column]);
    if (!label) {
      throw ParseError(line_no,
                       "unknown label '" + std::string(fields[cols.label_column]) + "'");
    }
    Token token{std::string(surface), *label, false};
    if (cols.flag_column) {
      std::string_view f = fields[*cols.flag_column];
      if (f == "1") token.ocr_error = true;
      else if (f == "0") token.ocr_error = false;
      else throw ParseError(line_no, "flag column must be 0 or 1, got '" + std::string(f) + "'");
    }
    current.tokens.push_back(std::move(token));
    current_lines.push_back(line_no);
  }

  // Scheme detection / validation over the whole corpus.
  std::vector<std::vector<Label>> all_labels;
  all_labels.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) all_labels.push_back(sentence_labels(s));

  auto valid_under = [&](TagScheme scheme) {
    for (const auto& labels : all_labels)
      if (!validate_labels(labels, scheme)) return false;
    return true;
  };

  TagScheme scheme = TagScheme::IOB1;
  bool valid = false;
  if (options.scheme) {
    scheme = *options.scheme;
    valid = valid_under(scheme);
  } else {
    for (TagScheme candidate : {TagScheme::IOB1, TagScheme::IOB2, TagScheme::IO}) {
      if (valid_under(candidate)) {
        scheme = candidate;
        valid = true;
        break;
      }
    }
  }
  corpus.scheme = scheme;

  std::size_t repaired = 0;
  if (!valid) {
    if (!options.repair) {
      for (std::size_t i = 0; i < all_labels.size(); ++i) {
        if (auto bad = first_invalid_label(all_labels[i], scheme)) {
          throw ParseError(token_lines[i][*bad],
                           "label sequence invalid under " + std::string(to_string(scheme)));
        }
      }
    }
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      auto labels = all_labels[i];
      repaired += repair_labels(labels, scheme);
      for (std::size_t j = 0; j < labels.size(); ++j)
        corpus.sentences[i].tokens[j].label = labels[j];
    }
  }
  if (stats) {
    stats->detected_scheme = scheme;
    stats->repaired_labels = repaired;
  }
  return corpus;
}

inline Corpus parse_conll(std::istream& in, const ParseOptions& options = {},
                          ParseStats* stats = nullptr) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conll(buf.str(), options, stats);
}

inline void write_conll(std::ostream& out, const Corpus& corpus, const ColumnSpec& cols = {}) {
  std::size_t width = std::max(cols.token_column, cols.label_column);
  if (cols.flag_column) width = std::max(width, *cols.flag_column);
  const char sep = cols.separator == ColumnSpec::Separator::Tab ? '\t' : ' ';
  std::vector<std::string> fields(width + 1);
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      for (auto& f : fields) f = "_";
      fields[cols.token_column] = token.surface;
      fields[cols.label_column] = token.label.to_string();
      if (cols.flag_column) fields[*cols.flag_column] = token.ocr_error ? "1" : "0";
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.put(sep);
        out << fields[i];
      }
      out.put('\n');
    }
    out.put('\n');
  }
}

inline std::string write_conll(const Corpus& corpus, const ColumnSpec& cols = {}) {
  std::ostringstream out;
  write_conll(out, corpus, cols);
  return out.str();
}

/// Re-encodes every sentence under `target`. IOB1 <-> IOB2 is lossless;
/// conversion to IO merges adjacent same-type entities.
inline Corpus convert_scheme(const Corpus& corpus, TagScheme target) {
  Corpus out = corpus;
  out.scheme = target;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto spans = extract_entities(corpus.sentences[i], corpus.scheme, i);
    auto labels = labels_from_spans(spans, corpus.sentences[i].size(), target);
    for (std::size_t j = 0; j < labels.size(); ++j)
      out.sentences[i].tokens[j].label = labels[j];
  }
  return out;
}

/// Entity-type mapping; an absent key is identity, nullopt drops the type.
using TagMapping = std::map<EntityType, std::optional<EntityType>>;

/// Drops or renames entity types span-wise; dropped spans become Outside and
/// the sentence is re-encoded under the corpus scheme.
inline Corpus map_tagset(const Corpus& corpus, const TagMapping& mapping) {
  Corpus out = corpus;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    auto spans = extract_entities(corpus.sentences[i], corpus.scheme, i);
    std::vector<EntitySpan> kept;
    for (auto span : spans) {
      auto it = mapping.find(span.type);
      if (it != mapping.end()) {
        if (!it->second) continue;  // dropped
        span.type = *it->second;
      }
      kept.push_back(span);
    }
    auto labels = labels_from_spans(kept, corpus.sentences[i].size(), corpus.scheme);
    for (std::size_t j = 0; j < labels.size(); ++j)
      out.sentences[i].tokens[j].label = labels[j];
  }
  return out;
}

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

/// Contiguous document-order split: first floor(n*train) sentences, then
/// floor(n*dev), remainder to test. No shuffling.
inline std::array<Corpus, 3> split_corpus(const Corpus& corpus, const SplitRatios& ratios) {
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be positive and sum to 1");
  }
  const std::size_t n = corpus.sentences.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train));
  const auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.dev));
  std::array<Corpus, 3> parts;
  for (auto& p : parts) {
    p.scheme = corpus.scheme;
    p.language = corpus.language;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t part = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);
    parts[part].sentences.push_back(corpus.sentences[i]);
  }
  return parts;
}

/// Samples whole sentences uniformly at random without replacement until the
/// next sampled sentence would push the token count past `target_tokens`.
/// Selected sentences keep their original relative order.
inline Corpus downsample(const Corpus& corpus, std::size_t target_tokens, std::uint64_t seed) {
  Corpus out;
  out.scheme = corpus.scheme;
  out.language = corpus.language;

  const std::size_t n = corpus.sentences.size();
  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;

  SplitMix64 rng(seed);
  std::vector<bool> selected(n, false);
  std::size_t tokens = 0;
  for (std::size_t left = n; left > 0; --left) {
    const std::size_t k = rng.next_below(left);
    const std::size_t idx = remaining[k];
    remaining[k] = remaining[left - 1];
    if (tokens + corpus.sentences[idx].size() > target_tokens) break;
    selected[idx] = true;
    tokens += corpus.sentences[idx].size();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (selected[i]) out.sentences.push_back(corpus.sentences[i]);
  return out;
}

struct CorpusStats {
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::map<EntityType, std::size_t> entity_counts;

  std::size_t entity_count() const {
    std::size_t n = 0;
    for (const auto& [t, c] : entity_counts) n += c;
    return n;
  }
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.sentence_count = corpus.sentences.size();
  stats.token_count = corpus.token_count();
  for (EntityType t : kEntityTypes) stats.entity_counts[t] = 0;
  for (const auto& span : extract_all_entities(corpus)) ++stats.entity_counts[span.type];
  return stats;
}

}  // namespace histner
