#include <catch2/catch_amalgamated.hpp>

#include "histner/conll.hpp"
#include "histner/corpus.hpp"
#include "testutil.hpp"

using namespace histner;

namespace {

Sentence sentence_from(const std::vector<std::string>& labels) {
  Sentence s;
  for (const auto& l : labels) s.tokens.push_back({"tok", *Label::from_string(l)});
  return s;
}

std::vector<EntitySpan> spans_of(const std::vector<std::string>& labels, TagScheme scheme) {
  return extract_entities(sentence_from(labels), scheme);
}

}  // namespace

TEST_CASE("label serialization is exactly O, I-TYPE, B-TYPE") {
  REQUIRE(Label::outside().to_string() == "O");
  REQUIRE(Label::inside(EntityType::PER).to_string() == "I-PER");
  REQUIRE(Label::begin(EntityType::LOC).to_string() == "B-LOC");
  REQUIRE(Label::from_string("I-MISC") == Label::inside(EntityType::MISC));
  REQUIRE(Label::from_string("B-ORG") == Label::begin(EntityType::ORG));
  REQUIRE(Label::from_string("O") == Label::outside());
  REQUIRE_FALSE(Label::from_string("I-XXX").has_value());
  REQUIRE_FALSE(Label::from_string("PER").has_value());
  REQUIRE_FALSE(Label::from_string("").has_value());
}

TEST_CASE("entity extraction follows the scheme definitions") {
  // A run of I-X starts an entity after O or a different type.
  auto spans = spans_of({"I-PER", "I-PER", "O"}, TagScheme::IOB1);
  REQUIRE(spans == std::vector<EntitySpan>{{0, 0, 1, EntityType::PER}});

  // B- splits adjacent same-type entities.
  spans = spans_of({"I-LOC", "B-LOC"}, TagScheme::IOB1);
  REQUIRE(spans == std::vector<EntitySpan>{{0, 0, 0, EntityType::LOC}, {0, 1, 1, EntityType::LOC}});

  // A type change starts a new entity.
  spans = spans_of({"O", "I-ORG", "I-PER"}, TagScheme::IOB1);
  REQUIRE(spans == std::vector<EntitySpan>{{0, 1, 1, EntityType::ORG}, {0, 2, 2, EntityType::PER}});

  // IOB2: entities start only at B-.
  spans = spans_of({"B-PER", "I-PER", "B-PER"}, TagScheme::IOB2);
  REQUIRE(spans == std::vector<EntitySpan>{{0, 0, 1, EntityType::PER}, {0, 2, 2, EntityType::PER}});

  // IO: maximal same-type runs.
  spans = spans_of({"I-LOC", "I-LOC", "I-ORG"}, TagScheme::IO);
  REQUIRE(spans == std::vector<EntitySpan>{{0, 0, 1, EntityType::LOC}, {0, 2, 2, EntityType::ORG}});
}

TEST_CASE("scheme validation rejects out-of-scheme sequences") {
  // IOB1 forbids B- after anything but a same-type entity end.
  REQUIRE_THROWS_AS(spans_of({"B-PER"}, TagScheme::IOB1), std::invalid_argument);
  REQUIRE_THROWS_AS(spans_of({"O", "B-LOC"}, TagScheme::IOB1), std::invalid_argument);
  REQUIRE_THROWS_AS(spans_of({"I-PER", "B-LOC"}, TagScheme::IOB1), std::invalid_argument);
  REQUIRE_NOTHROW(spans_of({"I-LOC", "B-LOC"}, TagScheme::IOB1));

  // IOB2 forbids bare I- and type switches inside runs.
  REQUIRE_THROWS_AS(spans_of({"I-PER"}, TagScheme::IOB2), std::invalid_argument);
  REQUIRE_THROWS_AS(spans_of({"B-PER", "I-LOC"}, TagScheme::IOB2), std::invalid_argument);
  REQUIRE_NOTHROW(spans_of({"B-PER", "I-PER"}, TagScheme::IOB2));

  // IO has no B- at all.
  REQUIRE_THROWS_AS(spans_of({"B-PER"}, TagScheme::IO), std::invalid_argument);
  REQUIRE_NOTHROW(spans_of({"I-PER", "I-LOC"}, TagScheme::IO));
}

TEST_CASE("labels_from_spans inverts extract_entities on random corpora") {
  SplitMix64 rng(101);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 1 + rng.next_below(10);
    const auto spans = testutil::random_spans(rng, 0, n, 3);
    for (TagScheme scheme : {TagScheme::IOB1, TagScheme::IOB2}) {
      const auto labels = labels_from_spans(spans, n, scheme);
      Sentence s;
      for (std::size_t i = 0; i < n; ++i) s.tokens.push_back({"x", labels[i]});
      REQUIRE(extract_entities(s, scheme) == spans);
    }
  }
}

TEST_CASE("scheme conversion IOB1<->IOB2 round trip is the identity") {
  SplitMix64 rng(202);
  for (int iter = 0; iter < 1000; ++iter) {
    const Corpus corpus = testutil::random_corpus(rng, 1 + rng.next_below(4), 8, 3);
    const Corpus iob2 = convert_scheme(corpus, TagScheme::IOB2);
    REQUIRE(validate_corpus(iob2));
    const Corpus back = convert_scheme(iob2, TagScheme::IOB1);
    REQUIRE(back.sentences.size() == corpus.sentences.size());
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
      REQUIRE(sentence_labels(back.sentences[i]) == sentence_labels(corpus.sentences[i]));
    // Span sets survive conversion unchanged.
    REQUIRE(extract_all_entities(iob2) == extract_all_entities(corpus));
  }
}

TEST_CASE("conversion to IO merges only adjacent same-type entities") {
  Sentence s = sentence_from({"I-LOC", "B-LOC", "I-PER"});
  Corpus corpus;
  corpus.scheme = TagScheme::IOB1;
  corpus.sentences.push_back(s);
  const Corpus io = convert_scheme(corpus, TagScheme::IO);
  REQUIRE(sentence_labels(io.sentences[0]) ==
          std::vector<Label>{Label::inside(EntityType::LOC), Label::inside(EntityType::LOC),
                             Label::inside(EntityType::PER)});
  // The two adjacent LOC entities collapse into one; the distinction is lost.
  REQUIRE(extract_all_entities(io).size() == 2);
}

TEST_CASE("repair coerces stray labels into the scheme") {
  std::vector<Label> labels{Label::outside(), Label::begin(EntityType::PER),
                            Label::inside(EntityType::PER)};
  const std::size_t fixed = repair_labels(labels, TagScheme::IOB1);
  REQUIRE(fixed == 1);
  REQUIRE(labels[1] == Label::inside(EntityType::PER));
  REQUIRE_FALSE(first_invalid_label(labels, TagScheme::IOB1).has_value());

  std::vector<Label> labels2{Label::inside(EntityType::LOC)};
  REQUIRE(repair_labels(labels2, TagScheme::IOB2) == 1);
  REQUIRE(labels2[0] == Label::begin(EntityType::LOC));
}

TEST_CASE("corpus text joins tokens with spaces and sentences with newlines") {
  Corpus corpus;
  Sentence a;
  a.tokens = {{"Le", Label::outside()}, {"Havre", Label::inside(EntityType::LOC)}};
  Sentence b;
  b.tokens = {{"Fin", Label::outside()}};
  corpus.sentences = {a, b};
  REQUIRE(corpus_text(corpus) == U"Le Havre\nFin\n");
  REQUIRE(sentence_text(corpus.sentences[0]) == U"Le Havre");
}
