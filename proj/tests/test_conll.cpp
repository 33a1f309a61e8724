#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "histner/conll.hpp"
#include "testutil.hpp"

using namespace histner;

TEST_CASE("parse splits sentences on blank lines") {
  const Corpus c = parse_conll("Paris I-LOC\n\nJan I-PER\n");
  REQUIRE(c.sentences.size() == 2);
  REQUIRE(c.sentences[0].tokens.size() == 1);
  REQUIRE(c.sentences[0].tokens[0].surface == "Paris");
  REQUIRE(c.sentences[0].tokens[0].label == Label::inside(EntityType::LOC));
  REQUIRE(c.sentences[1].tokens[0].surface == "Jan");
}

TEST_CASE("parse skips document markers and tolerates repeated blanks") {
  const Corpus c = parse_conll("-DOCSTART- O\n\n\nParis I-LOC\n\n\n-DOCSTART- O\nEnd O\n");
  REQUIRE(c.sentences.size() == 2);
  REQUIRE(c.sentences[0].tokens[0].surface == "Paris");
  REQUIRE(c.sentences[1].tokens[0].surface == "End");
}

TEST_CASE("empty input yields an empty corpus") {
  REQUIRE(parse_conll("").sentences.empty());
  REQUIRE(parse_conll("\n\n").sentences.empty());
}

TEST_CASE("parse errors carry exact line numbers") {
  try {
    parse_conll("Paris I-LOC\n\nbroken\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 3);
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }

  try {
    parse_conll("Paris I-LOC\nrue X-LOC\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 2);
  }

  // Invalid scheme transition: the offending token's own line is reported,
  // even with a document marker wedged inside the sentence.
  try {
    parse_conll("Paris I-LOC\n-DOCSTART- O\nrue B-PER\n", {.scheme = TagScheme::IOB1});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 3);
  }
}

TEST_CASE("column spec selects token, label, and flag columns") {
  ParseOptions opts;
  opts.columns.token_column = 1;
  opts.columns.label_column = 3;
  opts.columns.flag_column = 0;
  const Corpus c = parse_conll("1 Paris NNP I-LOC\n0 dort V O\n", opts);
  REQUIRE(c.sentences.size() == 1);
  REQUIRE(c.sentences[0].tokens[0].surface == "Paris");
  REQUIRE(c.sentences[0].tokens[0].label == Label::inside(EntityType::LOC));
  REQUIRE(c.sentences[0].tokens[0].ocr_error);
  REQUIRE_FALSE(c.sentences[0].tokens[1].ocr_error);

  REQUIRE_THROWS_AS(parse_conll("2 Paris NNP I-LOC\n", opts), ParseError);  // flag not 0/1
  REQUIRE_THROWS_AS(parse_conll("1 Paris NNP\n", opts), ParseError);        // too few columns
}

TEST_CASE("tab separator preserves empty fields") {
  ParseOptions opts;
  opts.columns.separator = ColumnSpec::Separator::Tab;
  opts.columns.token_column = 0;
  opts.columns.label_column = 2;
  const Corpus c = parse_conll("Paris\t\tI-LOC\n", opts);
  REQUIRE(c.sentences[0].tokens[0].label == Label::inside(EntityType::LOC));
  // Column 1 is empty; making it the token column is an error.
  ParseOptions bad = opts;
  bad.columns.token_column = 1;
  REQUIRE_THROWS_AS(parse_conll("Paris\t\tI-LOC\n", bad), ParseError);
}

TEST_CASE("scheme detection tries IOB1, then IOB2, then IO") {
  ParseStats stats;
  parse_conll("Paris I-LOC\n", {}, &stats);
  REQUIRE(stats.detected_scheme == TagScheme::IOB1);

  // A leading B- rules out IOB1, so detection falls through to IOB2.
  parse_conll("Paris B-LOC\nNord B-LOC\n", {}, &stats);
  REQUIRE(stats.detected_scheme == TagScheme::IOB2);

  // B- separating same-type entities is the IOB1 signature.
  parse_conll("a I-PER\nb B-PER\nc I-PER\n", {}, &stats);
  REQUIRE(stats.detected_scheme == TagScheme::IOB1);

  // Every B-free sequence is valid IOB1, so detection never reports IO;
  // reading an IO corpus as IOB1 is harmless because the schemes agree on
  // all B-free sequences. IO can still be forced.
  parse_conll("a I-PER\nb I-PER\n", {}, &stats);
  REQUIRE(stats.detected_scheme == TagScheme::IOB1);
  const Corpus io = parse_conll("a I-PER\nb I-PER\n", {.scheme = TagScheme::IO});
  REQUIRE(io.scheme == TagScheme::IO);

  // Invalid under every scheme: B- at start (not IOB1/IO), type switch on
  // I- after B- (not IOB2).
  REQUIRE_THROWS_AS(parse_conll("a B-PER\nb I-LOC\n"), ParseError);
}

TEST_CASE("forced scheme overrides detection and repair coerces") {
  REQUIRE_THROWS_AS(parse_conll("Paris B-LOC\n", {.scheme = TagScheme::IOB1}), ParseError);
  ParseStats stats;
  const Corpus c =
      parse_conll("Paris B-LOC\n", {.scheme = TagScheme::IOB1, .repair = true}, &stats);
  REQUIRE(stats.repaired_labels == 1);
  REQUIRE(c.sentences[0].tokens[0].label == Label::inside(EntityType::LOC));
}

TEST_CASE("write/parse round trip preserves random corpora") {
  SplitMix64 rng(42);
  for (int iter = 0; iter < 50; ++iter) {
    const Corpus corpus = testutil::random_corpus(rng, 1 + rng.next_below(6), 8, 2);
    const std::string text = write_conll(corpus);
    const Corpus back = parse_conll(text);
    REQUIRE(back.sentences.size() == corpus.sentences.size());
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      REQUIRE(back.sentences[i].size() == corpus.sentences[i].size());
      for (std::size_t t = 0; t < corpus.sentences[i].size(); ++t) {
        REQUIRE(back.sentences[i].tokens[t].surface == corpus.sentences[i].tokens[t].surface);
        REQUIRE(back.sentences[i].tokens[t].label == corpus.sentences[i].tokens[t].label);
      }
    }
  }
}

TEST_CASE("flag column round trips and fills gaps with placeholders") {
  Corpus corpus;
  Sentence s;
  s.tokens = {{"a", Label::outside(), true}, {"b", Label::inside(EntityType::PER), false}};
  corpus.sentences.push_back(s);
  ColumnSpec cols;
  cols.flag_column = 3;
  const std::string text = write_conll(corpus, cols);
  REQUIRE(text == "a O _ 1\nb I-PER _ 0\n\n");

  ParseOptions opts;
  opts.columns.flag_column = 3;
  const Corpus back = parse_conll(text, opts);
  REQUIRE(back.sentences[0].tokens[0].ocr_error);
  REQUIRE_FALSE(back.sentences[0].tokens[1].ocr_error);
}

TEST_CASE("tag mapping renames and drops entity types") {
  const Corpus c = parse_conll("a I-MISC\nb I-PER\nc I-ORG\n");
  TagMapping mapping;
  mapping[EntityType::MISC] = std::nullopt;        // drop
  mapping[EntityType::ORG] = EntityType::LOC;      // rename
  const Corpus mapped = map_tagset(c, mapping);
  REQUIRE(mapped.sentences[0].tokens[0].label == Label::outside());
  REQUIRE(mapped.sentences[0].tokens[1].label == Label::inside(EntityType::PER));
  REQUIRE(mapped.sentences[0].tokens[2].label == Label::inside(EntityType::LOC));
  REQUIRE(validate_corpus(mapped));
}

TEST_CASE("tag mapping keeps the label sequence valid when drops split runs") {
  // I-LOC B-LOC I-LOC with the middle entity dropped must not produce a
  // stray B- or an accidental merge.
  const Corpus c = parse_conll("a I-LOC\nb B-LOC\nc I-LOC\n");
  REQUIRE(extract_all_entities(c).size() == 2);
  TagMapping drop_all;
  drop_all[EntityType::LOC] = std::nullopt;
  const Corpus mapped = map_tagset(c, drop_all);
  for (const auto& t : mapped.sentences[0].tokens) REQUIRE(t.label == Label::outside());
  REQUIRE(validate_corpus(mapped));
}

TEST_CASE("split is contiguous with floor sizes and remainder to test") {
  SplitMix64 rng(7);
  const Corpus corpus = testutil::random_corpus(rng, 10, 5, 1);
  const auto parts = split_corpus(corpus, {0.8, 0.1, 0.1});
  REQUIRE(parts[0].sentences.size() == 8);
  REQUIRE(parts[1].sentences.size() == 1);
  REQUIRE(parts[2].sentences.size() == 1);
  // Order preserved: concatenation reproduces the corpus.
  REQUIRE(sentence_text(parts[0].sentences[0]) == sentence_text(corpus.sentences[0]));
  REQUIRE(sentence_text(parts[1].sentences[0]) == sentence_text(corpus.sentences[8]));
  REQUIRE(sentence_text(parts[2].sentences[0]) == sentence_text(corpus.sentences[9]));

  const auto parts7 = split_corpus(testutil::random_corpus(rng, 7, 5, 1), {0.8, 0.1, 0.1});
  REQUIRE(parts7[0].sentences.size() == 5);  // floor(7*0.8)
  REQUIRE(parts7[1].sentences.size() == 0);  // floor(7*0.1)
  REQUIRE(parts7[2].sentences.size() == 2);

  REQUIRE_THROWS_AS(split_corpus(corpus, {0.8, 0.1, 0.2}), std::invalid_argument);
  REQUIRE_THROWS_AS(split_corpus(corpus, {1.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("downsample respects the token budget and keeps order") {
  SplitMix64 rng(9);
  const Corpus corpus = testutil::random_corpus(rng, 200, 8, 2);
  const std::size_t total = corpus.token_count();
  const std::size_t target = total / 3;
  const Corpus down = downsample(corpus, target, 55);
  REQUIRE(down.token_count() <= target);
  REQUIRE(down.sentences.size() < corpus.sentences.size());

  // Determinism and seed sensitivity.
  const Corpus again = downsample(corpus, target, 55);
  REQUIRE(write_conll(again) == write_conll(down));
  const Corpus other = downsample(corpus, target, 56);
  REQUIRE(write_conll(other) != write_conll(down));

  // Original relative order is preserved: surfaces appear as a subsequence.
  std::size_t cursor = 0;
  for (const auto& s : down.sentences) {
    bool found = false;
    for (; cursor < corpus.sentences.size(); ++cursor) {
      if (sentence_text(corpus.sentences[cursor]) == sentence_text(s) &&
          sentence_labels(corpus.sentences[cursor]) == sentence_labels(s)) {
        ++cursor;
        found = true;
        break;
      }
    }
    REQUIRE(found);
  }

  // A budget larger than the corpus keeps everything.
  REQUIRE(downsample(corpus, total, 1).token_count() == total);
}

TEST_CASE("corpus stats count entities per type") {
  const Corpus c = parse_conll("a I-PER\nb I-PER\nc O\nd I-LOC\n\ne I-PER\n");
  const CorpusStats s = corpus_stats(c);
  REQUIRE(s.sentence_count == 2);
  REQUIRE(s.token_count == 5);
  REQUIRE(s.entity_counts.at(EntityType::PER) == 2);
  REQUIRE(s.entity_counts.at(EntityType::LOC) == 1);
  REQUIRE(s.entity_counts.at(EntityType::ORG) == 0);
  REQUIRE(s.entity_counts.at(EntityType::MISC) == 0);
  REQUIRE(s.entity_count() == 3);
}
