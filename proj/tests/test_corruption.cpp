#include <catch2/catch_amalgamated.hpp>

#include "histner/alignment.hpp"
#include "histner/corruption.hpp"
#include "testutil.hpp"

using namespace histner;

namespace {

Corpus repeated_word_corpus(std::size_t sentences, std::size_t tokens_each,
                            const std::string& word = "maison") {
  Corpus corpus;
  for (std::size_t i = 0; i < sentences; ++i) {
    Sentence s;
    for (std::size_t t = 0; t < tokens_each; ++t) s.tokens.push_back({word, Label::outside()});
    corpus.sentences.push_back(s);
  }
  return corpus;
}

CorruptionConfig french_config(std::uint64_t seed, double rate = 0.2) {
  CorruptionConfig c;
  c.rate = rate;
  c.alphabet = french_alphabet();
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("corruption preserves counts, labels, and token validity") {
  SplitMix64 rng(5);
  const Corpus corpus = testutil::random_corpus(rng, 50, 8, 2);
  const Corpus out = corrupt_corpus(corpus, french_config(3));
  REQUIRE(out.sentences.size() == corpus.sentences.size());
  REQUIRE(out.token_count() == corpus.token_count());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    REQUIRE(sentence_labels(out.sentences[i]) == sentence_labels(corpus.sentences[i]));
    for (const auto& t : out.sentences[i].tokens) {
      REQUIRE_FALSE(t.surface.empty());
      for (char32_t c : decode_utf8(t.surface)) REQUIRE_FALSE(is_blank(c));
    }
  }
}

TEST_CASE("every corrupted token is exactly one edit from its source") {
  const Corpus corpus = repeated_word_corpus(40, 25);
  const Corpus out = corrupt_corpus(corpus, french_config(17, 0.5));
  std::size_t corrupted = 0;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    for (std::size_t t = 0; t < corpus.sentences[i].size(); ++t) {
      const auto& before = corpus.sentences[i].tokens[t];
      const auto& after = out.sentences[i].tokens[t];
      if (!after.ocr_error) {
        REQUIRE(after.surface == before.surface);
        continue;
      }
      ++corrupted;
      REQUIRE(after.surface != before.surface);
      // Transpose counts as distance <= 2 under unit costs; insert/remove as 1.
      const double d =
          wagner_fischer(decode_utf8(before.surface), decode_utf8(after.surface)).total_cost;
      REQUIRE(d >= 1.0);
      REQUIRE(d <= 2.0);
    }
  }
  REQUIRE(corrupted > 0);
}

TEST_CASE("corruption rate lands near the configured value") {
  const Corpus corpus = repeated_word_corpus(100, 100);  // 10000 eligible tokens
  const Corpus out = corrupt_corpus(corpus, french_config(23, 0.2));
  std::size_t corrupted = 0;
  for (const auto& s : out.sentences)
    for (const auto& t : s.tokens)
      if (t.ocr_error) ++corrupted;
  const double fraction = static_cast<double>(corrupted) / 10000.0;
  REQUIRE(fraction >= 0.18);
  REQUIRE(fraction <= 0.22);
}

TEST_CASE("tokens without letters are never corrupted") {
  Corpus corpus;
  Sentence s;
  for (const char* surf : {"1870", "12.5", "...", "--", "%"})
    s.tokens.push_back({surf, Label::outside()});
  corpus.sentences.push_back(s);
  const Corpus out = corrupt_corpus(corpus, french_config(1, 1.0));
  for (std::size_t t = 0; t < s.size(); ++t) {
    REQUIRE(out.sentences[0].tokens[t].surface == s.tokens[t].surface);
    REQUIRE_FALSE(out.sentences[0].tokens[t].ocr_error);
  }
  REQUIRE_FALSE(eligible_for_corruption("1870"));
  REQUIRE(eligible_for_corruption("a1"));
}

TEST_CASE("inapplicable operations leave tokens untouched") {
  Corpus corpus;
  Sentence s;
  s.tokens = {{"a", Label::outside()}, {"oo", Label::outside()}};
  corpus.sentences.push_back(s);

  CorruptionConfig remove_only = french_config(2, 1.0);
  remove_only.operations = {CorruptionOp::Remove};
  Corpus out = corrupt_corpus(corpus, remove_only);
  REQUIRE(out.sentences[0].tokens[0].surface == "a");  // length-1 token can't shrink
  REQUIRE_FALSE(out.sentences[0].tokens[0].ocr_error);
  REQUIRE(out.sentences[0].tokens[1].surface == "o");

  CorruptionConfig transpose_only = french_config(2, 1.0);
  transpose_only.operations = {CorruptionOp::Transpose};
  out = corrupt_corpus(corpus, transpose_only);
  // "a" has no pair; "oo" has no differing pair: both must survive unchanged.
  REQUIRE(out.sentences[0].tokens[0].surface == "a");
  REQUIRE(out.sentences[0].tokens[1].surface == "oo");
  REQUIRE_FALSE(out.sentences[0].tokens[1].ocr_error);
}

TEST_CASE("insertions draw from the configured alphabet") {
  Corpus corpus = repeated_word_corpus(5, 10, "bb");
  CorruptionConfig config;
  config.rate = 1.0;
  config.operations = {CorruptionOp::Insert};
  config.alphabet = U"Q";
  config.seed = 4;
  const Corpus out = corrupt_corpus(corpus, config);
  for (const auto& s : out.sentences)
    for (const auto& t : s.tokens) {
      REQUIRE(t.ocr_error);
      REQUIRE(t.surface.find('Q') != std::string::npos);
      REQUIRE(t.surface.size() == 3);
    }
}

TEST_CASE("per-token randomness is independent of other sentences") {
  Corpus a = repeated_word_corpus(2, 20, "lettre");
  Corpus b = a;
  b.sentences[0].tokens[0].surface = "autre";
  const auto config = french_config(31, 0.5);
  const Corpus out_a = corrupt_corpus(a, config);
  const Corpus out_b = corrupt_corpus(b, config);
  // Sentence 1 is untouched by the change in sentence 0.
  for (std::size_t t = 0; t < 20; ++t)
    REQUIRE(out_a.sentences[1].tokens[t].surface == out_b.sentences[1].tokens[t].surface);
}

TEST_CASE("corruption is deterministic per seed and operation-order independent") {
  SplitMix64 rng(77);
  const Corpus corpus = testutil::random_corpus(rng, 30, 8, 2);
  const Corpus out1 = corrupt_corpus(corpus, french_config(9, 0.3));
  const Corpus out2 = corrupt_corpus(corpus, french_config(9, 0.3));
  REQUIRE(write_conll(out1) == write_conll(out2));
  const Corpus out3 = corrupt_corpus(corpus, french_config(10, 0.3));
  REQUIRE(write_conll(out3) != write_conll(out1));

  CorruptionConfig shuffled = french_config(9, 0.3);
  shuffled.operations = {CorruptionOp::Transpose, CorruptionOp::Insert, CorruptionOp::Remove,
                         CorruptionOp::Insert};
  REQUIRE(write_conll(corrupt_corpus(corpus, shuffled)) == write_conll(out1));
}

TEST_CASE("alphabet files match the built-in alphabets") {
  std::ifstream fr(std::string(HISTNER_DATA_DIR) + "/alphabet_fr.txt");
  REQUIRE(fr.good());
  REQUIRE(load_alphabet(fr) == french_alphabet());
  std::ifstream nl(std::string(HISTNER_DATA_DIR) + "/alphabet_nl.txt");
  REQUIRE(nl.good());
  REQUIRE(load_alphabet(nl) == dutch_alphabet());
}

TEST_CASE("corruption config validation rejects bad values") {
  CorruptionConfig c = french_config(1);
  c.rate = 1.5;
  REQUIRE_THROWS_AS(corrupt_corpus(Corpus{}, c), std::invalid_argument);
  c = french_config(1);
  c.operations.clear();
  REQUIRE_THROWS_AS(corrupt_corpus(Corpus{}, c), std::invalid_argument);
  c = french_config(1);
  c.alphabet.clear();
  REQUIRE_THROWS_AS(corrupt_corpus(Corpus{}, c), std::invalid_argument);
}
