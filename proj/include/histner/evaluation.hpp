#pragma once

// Exact-match chunk evaluation in the style of the CoNLL-2000 scorer:
// a predicted entity counts only when boundaries and type both equal a gold
// entity, metrics are micro-averaged, and an approximate-randomization test
// estimates the significance of an F1 difference between two systems.

#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "histner/corpus.hpp"
#include "histner/rng.hpp"

namespace histner {

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  double f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  EvalCounts& operator+=(const EvalCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
};

struct EvalReport {
  EvalCounts overall;  // sums of the per-type counts (micro-averaging)
  std::map<EntityType, EvalCounts> per_type;
  std::size_t token_count = 0;
  std::size_t correct_tokens = 0;  // label-identical tokens, for the accuracy line
};

struct SigTestResult {
  double observed_diff = 0.0;  // |overall F1(a) - overall F1(b)|
  double p_value = 1.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Both corpora must agree in sentence count and per-sentence token surfaces;
/// anything else makes span comparison meaningless.
inline void check_structure(const Corpus& gold, const Corpus& other, const char* name) {
  const std::size_t n = std::min(gold.sentences.size(), other.sentences.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = gold.sentences[i].tokens;
    const auto& o = other.sentences[i].tokens;
    bool same = g.size() == o.size();
    for (std::size_t t = 0; same && t < g.size(); ++t) same = g[t].surface == o[t].surface;
    if (!same)
      throw std::invalid_argument(std::string(name) + " diverges from gold at sentence " +
                                  std::to_string(i));
  }
  if (gold.sentences.size() != other.sentences.size())
    throw std::invalid_argument(std::string(name) + " diverges from gold at sentence " +
                                std::to_string(n) + " (sentence counts differ)");
}

inline EvalCounts count_spans(const std::vector<EntitySpan>& gold,
                              const std::vector<EntitySpan>& pred, EntityType type) {
  std::set<EntitySpan> gold_set;
  for (const auto& s : gold)
    if (s.type == type) gold_set.insert(s);
  EvalCounts c;
  for (const auto& s : pred) {
    if (s.type != type) continue;
    if (gold_set.erase(s) > 0) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = gold_set.size();
  return c;
}

inline void fill_token_accuracy(const Corpus& gold, const Corpus& pred, EvalReport& report) {
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i].tokens;
    const auto& p = pred.sentences[i].tokens;
    report.token_count += g.size();
    for (std::size_t t = 0; t < g.size(); ++t)
      if (g[t].label == p[t].label) ++report.correct_tokens;
  }
}

}  // namespace detail

/// Exact-match micro-averaged chunk evaluation. tp: predicted spans equal to
/// a gold span in boundaries and type; fp: the rest of the predictions;
/// fn: gold spans never matched.
inline EvalReport evaluate(const Corpus& gold, const Corpus& pred) {
  detail::check_structure(gold, pred, "prediction");
  const auto gold_spans = extract_all_entities(gold);
  const auto pred_spans = extract_all_entities(pred);

  EvalReport report;
  for (EntityType type : kEntityTypes) {
    const EvalCounts c = detail::count_spans(gold_spans, pred_spans, type);
    report.per_type[type] = c;
    report.overall += c;
  }
  detail::fill_token_accuracy(gold, pred, report);
  return report;
}

/// Evaluation restricted to the flagged subset of gold entities (for OCR-
/// damaged-entity analysis). A prediction exactly matching a flagged gold
/// span is tp; a prediction overlapping a flagged span without matching it
/// is fp; predictions disjoint from every flagged span are ignored, since
/// they are judged by the full evaluation instead; fn counts unmatched
/// flagged spans. `flagged` must have an entry for every gold entity.
inline EvalReport evaluate_subset(const Corpus& gold, const Corpus& pred,
                                  const std::map<EntitySpan, bool>& flagged) {
  detail::check_structure(gold, pred, "prediction");
  const auto gold_spans = extract_all_entities(gold);
  const auto pred_spans = extract_all_entities(pred);

  std::vector<EntitySpan> subset;
  for (const auto& span : gold_spans) {
    const auto it = flagged.find(span);
    if (it == flagged.end())
      throw std::invalid_argument("flag map is missing a gold entity in sentence " +
                                  std::to_string(span.sentence_index));
    if (it->second) subset.push_back(span);
  }

  auto overlaps = [](const EntitySpan& a, const EntitySpan& b) {
    return a.sentence_index == b.sentence_index && a.token_start <= b.token_end &&
           b.token_start <= a.token_end;
  };

  EvalReport report;
  std::set<EntitySpan> unmatched(subset.begin(), subset.end());
  for (const auto& p : pred_spans) {
    if (unmatched.erase(p) > 0) {
      ++report.per_type[p.type].tp;
      continue;
    }
    bool overlapping = false;
    for (const auto& g : subset) {
      // A span identical to a flagged gold span was already consumed as tp;
      // re-overlap here only covers genuinely differing spans.
      if (overlaps(p, g)) {
        overlapping = true;
        break;
      }
    }
    if (overlapping) ++report.per_type[p.type].fp;
  }
  for (const auto& g : unmatched) ++report.per_type[g.type].fn;
  for (EntityType type : kEntityTypes) report.overall += report.per_type[type];
  detail::fill_token_accuracy(gold, pred, report);
  return report;
}

/// Approximate randomization: per resample, each sentence's two system
/// outputs are swapped with probability 0.5, and the overall-F1 gap is
/// recomputed from per-sentence counts. p = (r+1)/(R+1) where r counts
/// resample gaps >= the observed gap (add-one keeps p > 0). The swap draw is
/// symmetric, so exchanging pred_a and pred_b cannot change the p-value.
inline SigTestResult significance_test(const Corpus& gold, const Corpus& pred_a,
                                       const Corpus& pred_b, std::size_t iterations = 1000,
                                       std::uint64_t seed = 0) {
  detail::check_structure(gold, pred_a, "prediction A");
  detail::check_structure(gold, pred_b, "prediction B");
  if (iterations == 0) throw std::invalid_argument("iterations must be >= 1");

  const std::size_t n = gold.sentences.size();
  std::vector<EvalCounts> counts_a(n), counts_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = extract_entities(gold.sentences[i], gold.scheme, i);
    const auto a = extract_entities(pred_a.sentences[i], pred_a.scheme, i);
    const auto b = extract_entities(pred_b.sentences[i], pred_b.scheme, i);
    for (EntityType type : kEntityTypes) {
      counts_a[i] += detail::count_spans(g, a, type);
      counts_b[i] += detail::count_spans(g, b, type);
    }
  }

  auto gap = [&](auto&& swapped) {
    EvalCounts total_a, total_b;
    for (std::size_t i = 0; i < n; ++i) {
      if (swapped(i)) {
        total_a += counts_b[i];
        total_b += counts_a[i];
      } else {
        total_a += counts_a[i];
        total_b += counts_b[i];
      }
    }
    const double d = total_a.f1() - total_b.f1();
    return d < 0 ? -d : d;
  };

  SigTestResult result;
  result.iterations = iterations;
  result.seed = seed;
  result.observed_diff = gap([](std::size_t) { return false; });

  std::size_t at_least = 0;
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    SplitMix64 rng(combine_seed(seed, iter));
    std::vector<bool> swap(n);
    for (std::size_t i = 0; i < n; ++i) swap[i] = rng.next_bool(0.5);
    // Tolerance absorbs float noise when a resample reproduces the observed
    // assignment; an exact tie must count.
    if (gap([&](std::size_t i) { return bool(swap[i]); }) >= result.observed_diff - 1e-12)
      ++at_least;
  }
  result.p_value = static_cast<double>(at_least + 1) / static_cast<double>(iterations + 1);
  return result;
}

inline nlohmann::json to_json(const EvalCounts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"f1", c.f1()}};
}

inline nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_type = nlohmann::json::object();
  for (const auto& [type, counts] : report.per_type)
    per_type[std::string(to_string(type))] = to_json(counts);
  return {{"overall", to_json(report.overall)}, {"per_type", per_type}};
}

inline nlohmann::json to_json(const SigTestResult& r) {
  return {{"observed_diff", r.observed_diff},
          {"p_value", r.p_value},
          {"iterations", r.iterations},
          {"seed", r.seed}};
}

/// Plain-text table in the layout of the classic CoNLL evaluation script.
inline std::string format_report(const EvalReport& report) {
  char line[160];
  std::string out;
  const auto& o = report.overall;
  std::snprintf(line, sizeof(line),
                "processed %zu tokens with %zu phrases; found: %zu phrases; correct: %zu.\n",
                report.token_count, o.tp + o.fn, o.tp + o.fp, o.tp);
  out += line;
  const double accuracy =
      report.token_count == 0
          ? 0.0
          : 100.0 * static_cast<double>(report.correct_tokens) / static_cast<double>(report.token_count);
  std::snprintf(line, sizeof(line),
                "accuracy: %6.2f%%; precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f\n", accuracy,
                100.0 * o.precision(), 100.0 * o.recall(), 100.0 * o.f1());
  out += line;
  std::map<std::string, EvalCounts> by_name;  // alphabetical, as conlleval prints
  for (const auto& [type, counts] : report.per_type)
    by_name[std::string(to_string(type))] = counts;
  for (const auto& [name, c] : by_name) {
    std::snprintf(line, sizeof(line),
                  "%17s: precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f  %zu\n", name.c_str(),
                  100.0 * c.precision(), 100.0 * c.recall(), 100.0 * c.f1(), c.tp + c.fp);
    out += line;
  }
  return out;
}

}  // namespace histner
