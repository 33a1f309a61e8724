#pragma once

// Character-level synthetic corruption: a configurable fraction of word
// tokens each receive one insert / remove / transpose edit. Word boundaries,
// token counts and labels are never touched, so tags carry over 1:1.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "histner/corpus.hpp"
#include "histner/rng.hpp"
#include "histner/utf8.hpp"

namespace histner {

enum class CorruptionOp : std::uint8_t { Insert, Remove, Transpose };

struct CorruptionConfig {
  double rate = 0.2;
  std::vector<CorruptionOp> operations{CorruptionOp::Insert, CorruptionOp::Remove,
                                       CorruptionOp::Transpose};
  std::u32string alphabet;  // insertion characters, one language's letters
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate >= 0.0 && rate <= 1.0))
      throw std::invalid_argument("corruption rate must be in [0,1]");
    if (operations.empty())
      throw std::invalid_argument("corruption needs at least one operation");
    if (alphabet.empty()) throw std::invalid_argument("corruption alphabet is empty");
  }
};

/// Lower and upper case base Latin letters plus the French diacritics.
inline std::u32string french_alphabet() {
  std::u32string a;
  for (char32_t c = U'a'; c <= U'z'; ++c) a.push_back(c);
  for (char32_t c = U'A'; c <= U'Z'; ++c) a.push_back(c);
  a += U"àâçéèêëîïôùûüÿœ";
  return a;
}

/// Lower and upper case base Latin letters plus the Dutch diacritics and the
/// ij digraph code points.
inline std::u32string dutch_alphabet() {
  std::u32string a;
  for (char32_t c = U'a'; c <= U'z'; ++c) a.push_back(c);
  for (char32_t c = U'A'; c <= U'Z'; ++c) a.push_back(c);
  a += U"éëïöü";
  a.push_back(U'ĳ');  // ij
  a.push_back(U'Ĳ');  // IJ
  return a;
}

/// Alphabet file: one character per line, UTF-8. Blank lines are skipped.
inline std::u32string load_alphabet(std::istream& in) {
  std::u32string alphabet;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cps = decode_utf8(line);
    if (cps.size() != 1)
      throw std::runtime_error("alphabet line " + std::to_string(line_no) +
                               ": expected exactly one character");
    alphabet.push_back(cps[0]);
  }
  if (alphabet.empty()) throw std::runtime_error("alphabet file is empty");
  return alphabet;
}

/// A token is eligible for corruption iff it contains at least one letter;
/// punctuation and numbers pass through untouched.
inline bool eligible_for_corruption(const std::string& surface) {
  for (char32_t c : decode_utf8(surface))
    if (is_letter(c)) return true;
  return false;
}

namespace detail {

inline bool has_letter(const std::u32string& cps) {
  for (char32_t c : cps)
    if (is_letter(c)) return true;
  return false;
}

// Adjacent positions whose two characters differ; transposing an equal pair
// would be a no-op and is not offered.
inline std::vector<std::size_t> transposable_positions(const std::u32string& cps) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i + 1 < cps.size(); ++i)
    if (cps[i] != cps[i + 1]) pos.push_back(i);
  return pos;
}

}  // namespace detail

/// Corrupts each eligible token (one containing at least one letter)
/// independently with probability `config.rate`, applying exactly one edit
/// drawn uniformly from the applicable subset of `config.operations`.
/// Remove and transpose require length >= 2 so no token ever becomes empty.
/// Randomness is a pure function of (seed, sentence index, token index);
/// corrupted tokens get their ocr_error flag set.
inline Corpus corrupt_corpus(const Corpus& corpus, const CorruptionConfig& config) {
  config.validate();
  Corpus out = corpus;
  for (std::size_t si = 0; si < out.sentences.size(); ++si) {
    for (std::size_t ti = 0; ti < out.sentences[si].tokens.size(); ++ti) {
      Token& token = out.sentences[si].tokens[ti];
      std::u32string cps = decode_utf8(token.surface);
      if (!detail::has_letter(cps)) continue;

      SplitMix64 rng(combine_seed(combine_seed(config.seed, si), ti));
      if (!rng.next_bool(config.rate)) continue;

      auto enabled = [&](CorruptionOp op) {
        return std::find(config.operations.begin(), config.operations.end(), op) !=
               config.operations.end();
      };
      // Canonical order keeps the uniform draw independent of how the caller
      // ordered (or duplicated) the operation list.
      std::vector<std::size_t> transposable;
      std::vector<CorruptionOp> applicable;
      if (enabled(CorruptionOp::Insert)) applicable.push_back(CorruptionOp::Insert);
      if (enabled(CorruptionOp::Remove) && cps.size() >= 2)
        applicable.push_back(CorruptionOp::Remove);
      if (enabled(CorruptionOp::Transpose)) {
        transposable = detail::transposable_positions(cps);
        if (!transposable.empty()) applicable.push_back(CorruptionOp::Transpose);
      }
      if (applicable.empty()) continue;

      switch (applicable[rng.next_below(applicable.size())]) {
        case CorruptionOp::Insert: {
          const std::size_t pos = rng.next_below(cps.size() + 1);
          const char32_t ch = config.alphabet[rng.next_below(config.alphabet.size())];
          cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(pos), ch);
          break;
        }
        case CorruptionOp::Remove: {
          const std::size_t pos = rng.next_below(cps.size());
          cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(pos));
          break;
        }
        case CorruptionOp::Transpose: {
          const std::size_t pos = transposable[rng.next_below(transposable.size())];
          std::swap(cps[pos], cps[pos + 1]);
          break;
        }
      }
      token.surface = encode_utf8(cps);
      token.ocr_error = true;
    }
  }
  return out;
}

}  // namespace histner
