#pragma once

// Character-level bitext alignment. wagner_fischer computes a full
// edit-distance matrix with traceback; windowed_align slides a window over
// a long clean/noisy pair, committing each window's path up to its midpoint
// and growing the window where the local alignment cost is too high.
// transfer_labels projects NER tags from a clean corpus onto noisy text
// through such an alignment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "histner/corpus.hpp"
#include "histner/utf8.hpp"

namespace histner {

enum class EditKind : std::uint8_t { Match, Substitute, Delete, Insert };

inline std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::Match: return "match";
    case EditKind::Substitute: return "substitute";
    case EditKind::Delete: return "delete";
    case EditKind::Insert: return "insert";
  }
  return "?";
}

/// One edit operation. clean_pos is -1 for Insert, noisy_pos is -1 for
/// Delete; Match/Substitute carry both.
struct EditOp {
  EditKind kind;
  std::int64_t clean_pos;
  std::int64_t noisy_pos;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct AlignmentPath {
  std::vector<EditOp> ops;
  double total_cost = 0.0;
};

struct EditCosts {
  double match = 0.0;
  double substitute = 1.0;
  double insert = 1.0;
  double remove = 1.0;
  /// Newlines are sentence anchors: substituting one against any other
  /// character is forbidden (they may only match, be deleted, or inserted),
  /// which keeps sentence boundaries recoverable after alignment.
  bool anchor_newlines = false;

  double substitute_cost(char32_t a, char32_t b) const {
    if (anchor_newlines && ((a == U'\n') != (b == U'\n'))) return kForbidden;
    return substitute;
  }

  static constexpr double kForbidden = 1e30;
};

/// Checks monotone, complete, non-crossing coverage of [0,a_len) x [0,b_len).
inline bool is_valid_alignment(const AlignmentPath& path, std::size_t a_len, std::size_t b_len) {
  std::int64_t next_a = 0;
  std::int64_t next_b = 0;
  for (const auto& op : path.ops) {
    const bool has_a = op.kind != EditKind::Insert;
    const bool has_b = op.kind != EditKind::Delete;
    if (has_a != (op.clean_pos >= 0) || has_b != (op.noisy_pos >= 0)) return false;
    if (has_a && op.clean_pos != next_a++) return false;
    if (has_b && op.noisy_pos != next_b++) return false;
  }
  return next_a == static_cast<std::int64_t>(a_len) && next_b == static_cast<std::int64_t>(b_len);
}

/// Minimal-cost global alignment of two code-point sequences with full
/// traceback. Cost rows are rolled; backpointers are packed two bits per
/// cell, so an 8K x 8K window stays in a few dozen megabytes. Traceback
/// tie-breaking prefers Match/Substitute, then Delete, then Insert.
inline AlignmentPath wagner_fischer(std::u32string_view a, std::u32string_view b,
                                    const EditCosts& costs = {}) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  // back[i][j]: 0 = diagonal, 1 = up (delete a[i-1]), 2 = left (insert b[j-1])
  std::vector<std::uint8_t> back((n + 1) * (m + 1) / 4 + 1, 0);
  auto set_back = [&](std::size_t i, std::size_t j, std::uint8_t v) {
    const std::size_t idx = i * (m + 1) + j;
    const std::size_t byte = idx >> 2;
    const unsigned shift = (idx & 3u) << 1;
    back[byte] = static_cast<std::uint8_t>((back[byte] & ~(3u << shift)) | (v << shift));
  };
  auto get_back = [&](std::size_t i, std::size_t j) -> std::uint8_t {
    const std::size_t idx = i * (m + 1) + j;
    return (back[idx >> 2] >> ((idx & 3u) << 1)) & 3u;
  };

  std::vector<double> prev(m + 1), cur(m + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    prev[j] = prev[j - 1] + costs.insert;
    set_back(0, j, 2);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = prev[0] + costs.remove;
    set_back(i, 0, 1);
    for (std::size_t j = 1; j <= m; ++j) {
      const double diag =
          prev[j - 1] + (a[i - 1] == b[j - 1] ? costs.match : costs.substitute_cost(a[i - 1], b[j - 1]));
      const double up = prev[j] + costs.remove;
      const double left = cur[j - 1] + costs.insert;
      if (diag <= up && diag <= left) {
        cur[j] = diag;
        set_back(i, j, 0);
      } else if (up <= left) {
        cur[j] = up;
        set_back(i, j, 1);
      } else {
        cur[j] = left;
        set_back(i, j, 2);
      }
    }
    std::swap(prev, cur);
  }

  AlignmentPath path;
  path.total_cost = prev[m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    switch (get_back(i, j)) {
      case 0:
        path.ops.push_back({a[i - 1] == b[j - 1] ? EditKind::Match : EditKind::Substitute,
                            static_cast<std::int64_t>(i - 1), static_cast<std::int64_t>(j - 1)});
        --i;
        --j;
        break;
      case 1:
        path.ops.push_back({EditKind::Delete, static_cast<std::int64_t>(i - 1), -1});
        --i;
        break;
      default:
        path.ops.push_back({EditKind::Insert, -1, static_cast<std::int64_t>(j - 1)});
        --j;
        break;
    }
  }
  std::reverse(path.ops.begin(), path.ops.end());
  return path;
}

struct WindowConfig {
  std::size_t initial_window = 500;
  double cost_threshold = 0.3;  // normalized: window cost / clean window length
  double growth_factor = 2.0;
  std::size_t max_window = 8000;
  bool anchor_newlines = true;

  void validate() const {
    if (initial_window < 1) throw std::invalid_argument("initial window must be >= 1");
    if (!(cost_threshold > 0)) throw std::invalid_argument("cost threshold must be > 0");
    if (!(growth_factor > 1)) throw std::invalid_argument("growth factor must be > 1");
    if (max_window < initial_window)
      throw std::invalid_argument("max window must be >= initial window");
  }
};

/// Clean-side character range [begin, end) that was committed from a window
/// that still exceeded the cost threshold at max_window.
struct CharRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  friend bool operator==(const CharRange&, const CharRange&) = default;
};

struct WindowedAlignment {
  AlignmentPath path;
  std::vector<CharRange> low_quality;
  std::size_t growth_events = 0;
  std::size_t windows_aligned = 0;
};

/// Aligns two long texts through a sliding window. Each window is aligned
/// with wagner_fischer; if the normalized cost clears the threshold the path
/// is committed up to its midpoint and the window restarts there, otherwise
/// the window grows. At max_window the best path is committed anyway and the
/// region is flagged as low quality rather than aborting, since fully
/// illegible stretches are expected input.
inline WindowedAlignment windowed_align(std::u32string_view clean, std::u32string_view noisy,
                                        const WindowConfig& config = {}) {
  config.validate();
  if (clean.empty() || noisy.empty())
    throw std::invalid_argument("windowed_align requires non-empty texts");

  EditCosts costs;
  costs.anchor_newlines = config.anchor_newlines;
  const double ratio =
      static_cast<double>(noisy.size()) / static_cast<double>(clean.size());

  WindowedAlignment result;
  std::size_t i = 0;  // committed clean cursor
  std::size_t j = 0;  // committed noisy cursor
  std::size_t window = config.initial_window;

  auto op_cost = [&](const EditOp& op) {
    switch (op.kind) {
      case EditKind::Match: return costs.match;
      case EditKind::Substitute:
        return costs.substitute_cost(clean[static_cast<std::size_t>(op.clean_pos)],
                                     noisy[static_cast<std::size_t>(op.noisy_pos)]);
      case EditKind::Delete: return costs.remove;
      case EditKind::Insert: return costs.insert;
    }
    return 0.0;
  };
  auto commit = [&](const std::vector<EditOp>& ops, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      EditOp op = ops[k];
      if (op.clean_pos >= 0) op.clean_pos += static_cast<std::int64_t>(i);
      if (op.noisy_pos >= 0) op.noisy_pos += static_cast<std::int64_t>(j);
      result.path.total_cost += op_cost(op);
      result.path.ops.push_back(op);
    }
  };

  while (i < clean.size() || j < noisy.size()) {
    const std::size_t rem_c = clean.size() - i;
    const std::size_t rem_n = noisy.size() - j;
    if (rem_c == 0) {
      for (std::size_t k = 0; k < rem_n; ++k) {
        result.path.ops.push_back({EditKind::Insert, -1, static_cast<std::int64_t>(j + k)});
        result.path.total_cost += costs.insert;
      }
      break;
    }
    if (rem_n == 0) {
      for (std::size_t k = 0; k < rem_c; ++k) {
        result.path.ops.push_back({EditKind::Delete, static_cast<std::int64_t>(i + k), -1});
        result.path.total_cost += costs.remove;
      }
      break;
    }

    const std::size_t w_clean = std::min(window, rem_c);
    const std::size_t w_noisy = std::min(
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::llround(static_cast<double>(window) * ratio))),
        rem_n);
    const bool is_final = (w_clean == rem_c) && (w_noisy == rem_n);

    auto sub = wagner_fischer(clean.substr(i, w_clean), noisy.substr(j, w_noisy), costs);
    ++result.windows_aligned;

    if (is_final) {
      commit(sub.ops, sub.ops.size());
      break;
    }

    const double normalized = sub.total_cost / static_cast<double>(w_clean);
    const bool at_max = window >= config.max_window;
    if (normalized <= config.cost_threshold || at_max) {
      // Midpoint: the op whose clean position is nearest to half the
      // window's clean span. The committed prefix runs through that op.
      const double target = static_cast<double>(w_clean) / 2.0;
      std::size_t cut = 0;
      double best = std::numeric_limits<double>::max();
      for (std::size_t k = 0; k < sub.ops.size(); ++k) {
        if (sub.ops[k].clean_pos < 0) continue;
        const double d = std::abs(static_cast<double>(sub.ops[k].clean_pos) - target);
        if (d < best) {
          best = d;
          cut = k;
        }
      }
      std::int64_t last_clean = -1;
      std::int64_t last_noisy = -1;
      for (std::size_t k = 0; k <= cut; ++k) {
        last_clean = std::max(last_clean, sub.ops[k].clean_pos);
        last_noisy = std::max(last_noisy, sub.ops[k].noisy_pos);
      }
      commit(sub.ops, cut + 1);
      if (at_max && normalized > config.cost_threshold) {
        result.low_quality.push_back({static_cast<std::int64_t>(i),
                                      static_cast<std::int64_t>(i) + last_clean + 1});
      }
      i += static_cast<std::size_t>(last_clean + 1);
      j += static_cast<std::size_t>(last_noisy + 1);
      window = config.initial_window;
    } else {
      window = std::min(
          config.max_window,
          std::max(window + 1, static_cast<std::size_t>(
                                   static_cast<double>(window) * config.growth_factor)));
      ++result.growth_events;
    }
  }
  return result;
}

/// Diagnostic dump: one op per line, "kind<TAB>clean_pos<TAB>noisy_pos",
/// with "-" for an absent position.
inline std::string dump_alignment(const AlignmentPath& path) {
  std::ostringstream out;
  for (const auto& op : path.ops) {
    out << to_string(op.kind) << '\t';
    if (op.clean_pos >= 0) out << op.clean_pos; else out << '-';
    out << '\t';
    if (op.noisy_pos >= 0) out << op.noisy_pos; else out << '-';
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Label transfer

/// Projects the clean corpus's NER tags onto noisy text through a full-text
/// character alignment (`path` must align corpus_text(clean_corpus) against
/// `noisy_text`). Noisy tokens take the label of the clean token they share
/// the most aligned characters with (ties to the earlier clean token); tokens
/// aligned only to insertions or whitespace become Outside. A token's
/// ocr_error flag is set when its surface differs from its source token's.
/// Output label sequences are valid IOB1 by construction: entity identity is
/// carried through the clean corpus's spans, so adjacent same-type entities
/// stay separated.
inline Corpus transfer_labels(const Corpus& clean_corpus, std::u32string_view noisy_text,
                              const AlignmentPath& path) {
  const std::u32string clean_text = corpus_text(clean_corpus);
  if (!is_valid_alignment(path, clean_text.size(), noisy_text.size()))
    throw std::invalid_argument("alignment path does not cover both texts");

  // Clean side: char -> global token id; token id -> (label, entity instance).
  std::vector<std::int64_t> clean_token_of(clean_text.size(), -1);
  std::vector<Label> clean_label;
  std::vector<std::string> clean_surface;
  std::vector<std::int64_t> clean_entity;  // entity instance id or -1
  {
    const auto spans = extract_all_entities(clean_corpus);
    std::size_t pos = 0;
    std::size_t token_id = 0;
    std::vector<std::size_t> token_base;  // first global token id per sentence
    std::size_t base = 0;
    for (const auto& s : clean_corpus.sentences) {
      token_base.push_back(base);
      base += s.size();
    }
    clean_entity.assign(base, -1);
    for (std::size_t e = 0; e < spans.size(); ++e) {
      const auto& span = spans[e];
      for (std::size_t t = span.token_start; t <= span.token_end; ++t)
        clean_entity[token_base[span.sentence_index] + t] = static_cast<std::int64_t>(e);
    }
    for (const auto& s : clean_corpus.sentences) {
      for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        const auto cps = decode_utf8(s.tokens[t].surface);
        for (std::size_t k = 0; k < cps.size(); ++k) clean_token_of[pos + k] =
            static_cast<std::int64_t>(token_id);
        pos += cps.size();
        clean_label.push_back(s.tokens[t].label);
        clean_surface.push_back(s.tokens[t].surface);
        ++token_id;
        if (t + 1 < s.tokens.size()) ++pos;  // inter-token space
      }
      ++pos;  // newline
    }
  }

  // Noisy side: tokenize on whitespace within newline-delimited sentences.
  struct NoisyToken {
    std::size_t line;
    std::u32string surface;
  };
  std::vector<NoisyToken> noisy_tokens;
  std::vector<std::int64_t> noisy_token_of(noisy_text.size(), -1);
  {
    std::size_t line = 0;
    std::size_t k = 0;
    while (k < noisy_text.size()) {
      const char32_t c = noisy_text[k];
      if (c == U'\n') {
        ++line;
        ++k;
      } else if (is_blank(c)) {
        ++k;
      } else {
        std::size_t start = k;
        while (k < noisy_text.size() && noisy_text[k] != U'\n' && !is_blank(noisy_text[k])) ++k;
        for (std::size_t p = start; p < k; ++p)
          noisy_token_of[p] = static_cast<std::int64_t>(noisy_tokens.size());
        noisy_tokens.push_back({line, std::u32string(noisy_text.substr(start, k - start))});
      }
    }
  }

  // Character-overlap counts. Clean token ids arrive in nondecreasing order
  // per noisy token, so a per-token run-length list is enough.
  std::vector<std::vector<std::pair<std::int64_t, std::size_t>>> overlap(noisy_tokens.size());
  for (const auto& op : path.ops) {
    if (op.kind != EditKind::Match && op.kind != EditKind::Substitute) continue;
    const std::int64_t nt = noisy_token_of[static_cast<std::size_t>(op.noisy_pos)];
    const std::int64_t ct = clean_token_of[static_cast<std::size_t>(op.clean_pos)];
    if (nt < 0 || ct < 0) continue;
    auto& runs = overlap[static_cast<std::size_t>(nt)];
    if (!runs.empty() && runs.back().first == ct) {
      ++runs.back().second;
    } else {
      runs.emplace_back(ct, 1);
    }
  }

  // Assign each noisy token its majority source token.
  std::vector<std::int64_t> source_token(noisy_tokens.size(), -1);
  for (std::size_t t = 0; t < noisy_tokens.size(); ++t) {
    std::size_t best_count = 0;
    for (const auto& [ct, count] : overlap[t]) {
      if (count > best_count) {  // ties keep the earlier clean token
        best_count = count;
        source_token[t] = ct;
      }
    }
  }

  // Build the output corpus sentence by sentence; empty noisy lines vanish.
  Corpus out;
  out.scheme = TagScheme::IOB1;
  out.language = clean_corpus.language;

  std::size_t t = 0;
  while (t < noisy_tokens.size()) {
    const std::size_t line = noisy_tokens[t].line;
    Sentence sentence;
    struct TokenEntity {
      std::int64_t entity;
      EntityType type;
    };
    std::vector<TokenEntity> entity_of;
    while (t < noisy_tokens.size() && noisy_tokens[t].line == line) {
      Token token;
      token.surface = encode_utf8(noisy_tokens[t].surface);
      const std::int64_t src = source_token[t];
      if (src < 0) {
        token.ocr_error = true;
        entity_of.push_back({-1, EntityType::PER});
      } else {
        const auto s = static_cast<std::size_t>(src);
        token.ocr_error = token.surface != clean_surface[s];
        const Label& lab = clean_label[s];
        if (lab.is_outside() || clean_entity[s] < 0) {
          entity_of.push_back({-1, EntityType::PER});
        } else {
          entity_of.push_back({clean_entity[s], lab.type()});
        }
      }
      sentence.tokens.push_back(std::move(token));
      ++t;
    }
    // Runs of the same entity instance become spans; IOB1 emission separates
    // adjacent same-type instances with B-.
    std::vector<EntitySpan> spans;
    std::size_t k = 0;
    while (k < entity_of.size()) {
      if (entity_of[k].entity < 0) {
        ++k;
        continue;
      }
      std::size_t start = k;
      while (k + 1 < entity_of.size() && entity_of[k + 1].entity == entity_of[start].entity) ++k;
      spans.push_back({out.sentences.size(), start, k, entity_of[start].type});
      ++k;
    }
    auto labels = labels_from_spans(spans, sentence.size(), TagScheme::IOB1);
    for (std::size_t p = 0; p < labels.size(); ++p) sentence.tokens[p].label = labels[p];
    out.sentences.push_back(std::move(sentence));
  }
  return out;
}

/// An entity is flagged iff any token in its span carries the ocr_error flag.
inline std::map<EntitySpan, bool> flag_entity_ocr_errors(const Corpus& corpus) {
  std::map<EntitySpan, bool> flags;
  for (const auto& span : extract_all_entities(corpus)) {
    bool flagged = false;
    const auto& tokens = corpus.sentences[span.sentence_index].tokens;
    for (std::size_t t = span.token_start; t <= span.token_end; ++t)
      flagged |= tokens[t].ocr_error;
    flags[span] = flagged;
  }
  return flags;
}

}  // namespace histner
