// histner - deterministic toolkit for preparing, noisifying, aligning, and
// scoring NER corpora targeted at OCR'd historical text.
//
// Subcommands cover the whole pipeline: corpus handling (convert, map-tags,
// split, downsample, stats), noisification (corrupt, synocr), annotation
// projection across a character alignment (align-transfer), and scoring
// (eval, eval-ocr-subset, sigtest). A single global --seed reproduces every
// stage: each randomized stage derives its own stream from (seed, stage
// name), so reruns with identical inputs, flags, and seed are byte-identical.
//
// Exit codes: 0 success, 1 usage error, 2 data error (parse failures carry
// line numbers). Every successful run ends with one machine-readable
// "cmd=<name> status=ok key=value ..." line on stdout.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "histner/histner.hpp"

namespace {

using namespace histner;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Accumulates the trailing machine-readable summary line.
class Summary {
 public:
  explicit Summary(std::string_view cmd) : line_("cmd=") {
    line_ += cmd;
    line_ += " status=ok";
  }
  Summary& add(std::string_view key, std::string_view value) {
    line_ += ' ';
    line_ += key;
    line_ += '=';
    line_ += value;
    return *this;
  }
  Summary& add(std::string_view key, const char* value) {
    return add(key, std::string_view(value));
  }
  Summary& add(std::string_view key, std::size_t value) {
    return add(key, std::string_view(std::to_string(value)));
  }
  Summary& add(std::string_view key, double value) { return add(key, std::string_view(fmt(value))); }
  Summary& add(std::string_view key, bool value) { return add(key, value ? "true" : "false"); }
  void print() const { std::cout << line_ << '\n'; }

 private:
  std::string line_;
};

// ---------------------------------------------------------------------------
// Shared CoNLL input options

struct InputOptions {
  std::size_t token_column = 0;
  std::size_t label_column = 1;
  int flag_column = -1;  // -1: no ocr_error column
  std::string separator = "whitespace";
  std::string scheme = "auto";
  bool repair = false;
  std::string language;
};

TagScheme scheme_from_string(const std::string& s) {
  if (s == "io") return TagScheme::IO;
  if (s == "iob1") return TagScheme::IOB1;
  return TagScheme::IOB2;
}

std::string scheme_to_string(TagScheme s) {
  switch (s) {
    case TagScheme::IO: return "io";
    case TagScheme::IOB1: return "iob1";
    case TagScheme::IOB2: return "iob2";
  }
  return "?";
}

void add_input_options(CLI::App* cmd, InputOptions& o, int default_flag_column = -1,
                       const std::string& default_language = "") {
  o.flag_column = default_flag_column;
  o.language = default_language;
  cmd->add_option("--token-column", o.token_column, "Input column holding the token surface")
      ->capture_default_str();
  cmd->add_option("--label-column", o.label_column, "Input column holding the NER label")
      ->capture_default_str();
  cmd->add_option("--flag-column", o.flag_column,
                  "Input column holding the 0/1 ocr_error flag; -1 for none")
      ->capture_default_str();
  cmd->add_option("--separator", o.separator, "Column separator")
      ->check(CLI::IsMember({"whitespace", "tab"}))
      ->capture_default_str();
  cmd->add_option("--scheme", o.scheme, "Input tag scheme; auto validates IOB1, IOB2, IO in turn")
      ->check(CLI::IsMember({"auto", "io", "iob1", "iob2"}))
      ->capture_default_str();
  cmd->add_flag("--repair", o.repair, "Coerce invalid label sequences instead of failing");
  cmd->add_option("--language", o.language, "Language identifier stored on the corpus")
      ->capture_default_str();
}

ParseOptions to_parse_options(const InputOptions& o) {
  ParseOptions p;
  p.columns.token_column = o.token_column;
  p.columns.label_column = o.label_column;
  if (o.flag_column >= 0) p.columns.flag_column = static_cast<std::size_t>(o.flag_column);
  p.columns.separator =
      o.separator == "tab" ? ColumnSpec::Separator::Tab : ColumnSpec::Separator::Whitespace;
  if (o.scheme != "auto") p.scheme = scheme_from_string(o.scheme);
  p.repair = o.repair;
  p.language = o.language;
  return p;
}

// ---------------------------------------------------------------------------
// File IO

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("failed reading " + path);
  return buf.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

Corpus read_corpus(const std::string& path, const InputOptions& o, ParseStats* stats = nullptr) {
  const std::string text = read_file(path);
  try {
    return parse_conll(text, to_parse_options(o), stats);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Flag-value validators

std::string check_ratios(const std::string& s) {
  double a, b, c;
  char tail;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &a, &b, &c, &tail) != 3)
    return "expected three comma-separated ratios, e.g. 0.8,0.1,0.1";
  return "";
}

std::string check_ops(const std::string& s) {
  std::istringstream in(s);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    if (item != "insert" && item != "remove" && item != "transpose")
      return "unknown operation '" + item + "' (choose from insert, remove, transpose)";
    any = true;
  }
  return any ? "" : "operation list is empty";
}

std::string check_map_spec(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) return "expected FROM=TO or FROM= (drop), e.g. MISC=";
  if (!parse_entity_type(s.substr(0, eq))) return "unknown entity type '" + s.substr(0, eq) + "'";
  const std::string to = s.substr(eq + 1);
  if (!to.empty() && !parse_entity_type(to)) return "unknown entity type '" + to + "'";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "histner: prepare, noisify, align, and score NER corpora for OCR'd "
      "historical text"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed,
                 "Global seed; randomized stages derive their streams from (seed, stage name)")
      ->capture_default_str();
  app.set_config("--config", "",
                 "Key=value config file; subcommand keys as <cmd>.<key>. Flags win.");

  // --- convert ---------------------------------------------------------
  auto* convert = app.add_subcommand("convert", "Rewrite a corpus in another tag scheme");
  InputOptions convert_in;
  std::string convert_to = "iob1";
  std::string convert_input, convert_output;
  add_input_options(convert, convert_in);
  convert->add_option("--to", convert_to, "Target tag scheme")
      ->check(CLI::IsMember({"io", "iob1", "iob2"}))
      ->capture_default_str();
  convert->add_option("input", convert_input, "Input CoNLL file")->required();
  convert->add_option("output", convert_output, "Output CoNLL file")->required();
  convert->callback([&] {
    const Corpus corpus = read_corpus(convert_input, convert_in);
    const Corpus out = convert_scheme(corpus, scheme_from_string(convert_to));
    write_file(convert_output, write_conll(out));
    Summary("convert")
        .add("sentences", out.sentences.size())
        .add("tokens", out.token_count())
        .add("scheme", convert_to)
        .print();
  });

  // --- map-tags --------------------------------------------------------
  auto* map_tags = app.add_subcommand(
      "map-tags", "Map or drop entity types (e.g. --map MISC= drops MISC)");
  InputOptions map_in;
  std::vector<std::string> map_specs;
  std::string map_input, map_output;
  add_input_options(map_tags, map_in);
  map_tags->add_option("--map", map_specs, "Mapping FROM=TO, or FROM= to drop; repeatable")
      ->check(check_map_spec, "FROM=TO");
  map_tags->add_option("input", map_input, "Input CoNLL file")->required();
  map_tags->add_option("output", map_output, "Output CoNLL file")->required();
  map_tags->callback([&] {
    TagMapping mapping;
    for (const auto& spec : map_specs) {
      const auto eq = spec.find('=');
      const auto from = *parse_entity_type(spec.substr(0, eq));
      const std::string to = spec.substr(eq + 1);
      mapping[from] = to.empty() ? std::nullopt : parse_entity_type(to);
    }
    const Corpus corpus = read_corpus(map_input, map_in);
    const Corpus out = map_tagset(corpus, mapping);
    write_file(map_output, write_conll(out));
    Summary("map-tags")
        .add("sentences", out.sentences.size())
        .add("tokens", out.token_count())
        .add("entities", corpus_stats(out).entity_count())
        .print();
  });

  // --- split -----------------------------------------------------------
  auto* split = app.add_subcommand(
      "split", "Contiguous train/dev/test split (floor(n*train), floor(n*dev), rest)");
  InputOptions split_in;
  std::string split_ratios = "0.8,0.1,0.1";
  std::string split_input, split_train, split_dev, split_test;
  add_input_options(split, split_in);
  split->add_option("--ratios", split_ratios, "train,dev,test ratios; must sum to 1")
      ->check(check_ratios, "R,R,R")
      ->capture_default_str();
  split->add_option("input", split_input, "Input CoNLL file")->required();
  split->add_option("--train", split_train, "Output path for the train part")->required();
  split->add_option("--dev", split_dev, "Output path for the dev part")->required();
  split->add_option("--test", split_test, "Output path for the test part")->required();
  split->callback([&] {
    SplitRatios ratios;
    std::sscanf(split_ratios.c_str(), "%lf,%lf,%lf", &ratios.train, &ratios.dev, &ratios.test);
    const Corpus corpus = read_corpus(split_input, split_in);
    const auto parts = split_corpus(corpus, ratios);
    write_file(split_train, write_conll(parts[0]));
    write_file(split_dev, write_conll(parts[1]));
    write_file(split_test, write_conll(parts[2]));
    Summary("split")
        .add("sentences", corpus.sentences.size())
        .add("train_sentences", parts[0].sentences.size())
        .add("dev_sentences", parts[1].sentences.size())
        .add("test_sentences", parts[2].sentences.size())
        .add("train_tokens", parts[0].token_count())
        .add("dev_tokens", parts[1].token_count())
        .add("test_tokens", parts[2].token_count())
        .print();
  });

  // --- downsample ------------------------------------------------------
  auto* downsample_cmd = app.add_subcommand(
      "downsample", "Sample whole sentences uniformly until a token budget is reached");
  InputOptions downsample_in;
  std::uint64_t downsample_target = 0;
  std::string downsample_input, downsample_output;
  add_input_options(downsample_cmd, downsample_in);
  downsample_cmd
      ->add_option("--target-tokens", downsample_target,
                   "Token budget; sampling stops at the first sentence that would exceed it")
      ->required();
  downsample_cmd->add_option("input", downsample_input, "Input CoNLL file")->required();
  downsample_cmd->add_option("output", downsample_output, "Output CoNLL file")->required();
  downsample_cmd->callback([&] {
    const Corpus corpus = read_corpus(downsample_input, downsample_in);
    const Corpus out = downsample(corpus, downsample_target, derive_seed(seed, "downsample"));
    write_file(downsample_output, write_conll(out));
    Summary("downsample")
        .add("sentences_in", corpus.sentences.size())
        .add("tokens_in", corpus.token_count())
        .add("sentences_out", out.sentences.size())
        .add("tokens_out", out.token_count())
        .add("target_tokens", std::size_t(downsample_target))
        .print();
  });

  // --- corrupt ---------------------------------------------------------
  auto* corrupt = app.add_subcommand(
      "corrupt", "Synthetic misspellings: corrupt a fraction of word tokens by one edit each");
  InputOptions corrupt_in;
  double corrupt_rate = 0.2;
  std::string corrupt_ops = "insert,remove,transpose";
  std::string corrupt_alphabet_file;
  bool corrupt_write_flags = false;
  std::string corrupt_input, corrupt_output;
  add_input_options(corrupt, corrupt_in, -1, "fr");
  corrupt->add_option("--rate", corrupt_rate, "Per-token corruption probability")
      ->capture_default_str();
  corrupt->add_option("--ops", corrupt_ops, "Comma list of edits to draw from")
      ->check(check_ops, "OPS")
      ->capture_default_str();
  corrupt->add_option("--alphabet", corrupt_alphabet_file,
                      "Insertion alphabet file (one character per line); overrides --language");
  corrupt->add_flag("--write-flags", corrupt_write_flags,
                    "Also write the 0/1 corrupted flag as column 2");
  corrupt->add_option("input", corrupt_input, "Input CoNLL file")->required();
  corrupt->add_option("output", corrupt_output, "Output CoNLL file")->required();
  corrupt->callback([&] {
    CorruptionConfig config;
    config.rate = corrupt_rate;
    config.operations.clear();
    std::istringstream ops_in(corrupt_ops);
    std::string op;
    while (std::getline(ops_in, op, ',')) {
      if (op == "insert") config.operations.push_back(CorruptionOp::Insert);
      if (op == "remove") config.operations.push_back(CorruptionOp::Remove);
      if (op == "transpose") config.operations.push_back(CorruptionOp::Transpose);
    }
    if (!corrupt_alphabet_file.empty()) {
      std::ifstream in(corrupt_alphabet_file);
      if (!in) throw std::runtime_error("cannot open " + corrupt_alphabet_file);
      config.alphabet = load_alphabet(in);
    } else if (corrupt_in.language == "fr") {
      config.alphabet = french_alphabet();
    } else if (corrupt_in.language == "nl") {
      config.alphabet = dutch_alphabet();
    } else {
      throw std::runtime_error("no built-in alphabet for language '" + corrupt_in.language +
                               "'; pass --alphabet");
    }
    config.seed = derive_seed(seed, "corrupt");

    const Corpus corpus = read_corpus(corrupt_input, corrupt_in);
    const Corpus out = corrupt_corpus(corpus, config);
    ColumnSpec cols;
    if (corrupt_write_flags) cols.flag_column = 2;
    write_file(corrupt_output, write_conll(out, cols));

    std::size_t eligible = 0, corrupted = 0;
    for (const auto& s : out.sentences) {
      for (const auto& t : s.tokens) {
        if (eligible_for_corruption(t.surface)) ++eligible;
        if (t.ocr_error) ++corrupted;
      }
    }
    Summary("corrupt")
        .add("sentences", out.sentences.size())
        .add("tokens", out.token_count())
        .add("eligible", eligible)
        .add("corrupted", corrupted)
        .add("rate", corrupt_rate)
        .add("measured_rate", eligible == 0 ? 0.0
                                            : static_cast<double>(corrupted) /
                                                  static_cast<double>(eligible))
        .print();
  });

  // --- synocr ----------------------------------------------------------
  auto* synocr = app.add_subcommand(
      "synocr",
      "Run a corpus through an OCR channel; output is plain text, one line per sentence");
  InputOptions synocr_in;
  OcrNoiseConfig synocr_defaults = OcrNoiseConfig::defaults();
  double p_substitute = synocr_defaults.p_substitute;
  double p_delete = synocr_defaults.p_delete;
  double p_insert = synocr_defaults.p_insert;
  double p_space_split = synocr_defaults.p_space_split;
  double p_space_merge = synocr_defaults.p_space_merge;
  double p_illegible = synocr_defaults.p_illegible_line;
  std::string synocr_confusions, synocr_garble;
  std::string synocr_external;
  std::uint64_t synocr_batch = 150;
  double synocr_timeout = 300.0;
  std::string synocr_input, synocr_output;
  add_input_options(synocr, synocr_in);
  std::vector<CLI::Option*> builtin_opts{
      synocr->add_option("--p-substitute", p_substitute, "Confusion-substitution probability")
          ->capture_default_str(),
      synocr->add_option("--p-delete", p_delete, "Character-loss probability")
          ->capture_default_str(),
      synocr->add_option("--p-insert", p_insert, "Speck-insertion probability")
          ->capture_default_str(),
      synocr->add_option("--p-space-split", p_space_split, "Intra-token space-split probability")
          ->capture_default_str(),
      synocr->add_option("--p-space-merge", p_space_merge, "Token-merge probability")
          ->capture_default_str(),
      synocr->add_option("--p-illegible", p_illegible, "Whole-line garble probability")
          ->capture_default_str(),
      synocr->add_option("--confusions", synocr_confusions,
                         "Confusion table file (source<TAB>replacement<TAB>weight)"),
      synocr->add_option("--garble", synocr_garble, "Characters used for garble and specks")};
  auto* external_opt =
      synocr->add_option("--external", synocr_external,
                         "Shell command implementing the channel (clean text on stdin, "
                         "recognized text on stdout); replaces the built-in simulator");
  for (auto* opt : builtin_opts) external_opt->excludes(opt);
  synocr->add_option("--batch-size", synocr_batch, "Sentences per external batch")
      ->capture_default_str();
  synocr->add_option("--timeout", synocr_timeout, "Per-batch timeout in seconds")
      ->capture_default_str();
  synocr->add_option("input", synocr_input, "Input CoNLL file")->required();
  synocr->add_option("output", synocr_output, "Output text file")->required();
  synocr->callback([&] {
    const Corpus corpus = read_corpus(synocr_input, synocr_in);
    std::string noisy;
    if (!synocr_external.empty()) {
      ExternalPipelineConfig config;
      config.channel_command = synocr_external;
      config.batch_size_sentences = synocr_batch;
      config.timeout_seconds = synocr_timeout;
      noisy = external_ocr(corpus, config, &std::cerr);
    } else {
      OcrNoiseConfig config = OcrNoiseConfig::defaults();
      config.p_substitute = p_substitute;
      config.p_delete = p_delete;
      config.p_insert = p_insert;
      config.p_space_split = p_space_split;
      config.p_space_merge = p_space_merge;
      config.p_illegible_line = p_illegible;
      if (!synocr_confusions.empty()) {
        std::ifstream in(synocr_confusions);
        if (!in) throw std::runtime_error("cannot open " + synocr_confusions);
        try {
          config.substitution_table = load_confusion_table(in);
        } catch (const std::exception& e) {
          throw std::runtime_error(synocr_confusions + ": " + e.what());
        }
      }
      if (!synocr_garble.empty()) {
        auto cps = decode_utf8(synocr_garble);
        config.garble_alphabet.assign(cps.begin(), cps.end());
      }
      config.seed = derive_seed(seed, "synocr");
      noisy = simulate_ocr(corpus, config);
    }
    write_file(synocr_output, noisy);
    Summary("synocr")
        .add("sentences", corpus.sentences.size())
        .add("tokens", corpus.token_count())
        .add("channel", synocr_external.empty() ? "builtin" : "external")
        .add("output_bytes", noisy.size())
        .print();
  });

  // --- align-transfer --------------------------------------------------
  auto* align = app.add_subcommand(
      "align-transfer",
      "Align noisy text to a clean corpus and project the labels onto the noisy tokens");
  InputOptions align_in;
  WindowConfig default_window;
  std::uint64_t align_window = default_window.initial_window;
  double align_threshold = default_window.cost_threshold;
  double align_growth = default_window.growth_factor;
  std::uint64_t align_max_window = default_window.max_window;
  bool align_no_anchor = false;
  std::string align_dump;
  std::string align_clean, align_noisy, align_output;
  add_input_options(align, align_in);
  align->add_option("--window", align_window, "Initial clean-side window size in characters")
      ->capture_default_str();
  align->add_option("--cost-threshold", align_threshold,
                    "Maximum accepted cost per clean character before the window grows")
      ->capture_default_str();
  align->add_option("--growth-factor", align_growth, "Window growth factor")
      ->capture_default_str();
  align->add_option("--max-window", align_max_window,
                    "Window size at which a too-costly region is committed and flagged")
      ->capture_default_str();
  align->add_flag("--no-anchor-newlines", align_no_anchor,
                  "Allow newline/non-newline substitutions in the alignment");
  align->add_option("--dump-alignment", align_dump,
                    "Also write the edit operations (kind<TAB>clean_pos<TAB>noisy_pos)");
  align->add_option("clean", align_clean, "Clean annotated CoNLL file")->required();
  align->add_option("noisy", align_noisy, "Noisy text file, one line per clean sentence block")
      ->required();
  align->add_option("output", align_output,
                    "Output CoNLL file; column 2 carries the 0/1 ocr_error flag")
      ->required();
  align->callback([&] {
    const Corpus clean = read_corpus(align_clean, align_in);
    std::u32string noisy;
    try {
      noisy = decode_utf8(read_file(align_noisy));
    } catch (const Utf8Error& e) {
      throw std::runtime_error(align_noisy + ": " + e.what());
    }
    WindowConfig config;
    config.initial_window = align_window;
    config.cost_threshold = align_threshold;
    config.growth_factor = align_growth;
    config.max_window = align_max_window;
    config.anchor_newlines = !align_no_anchor;

    const auto aligned = windowed_align(corpus_text(clean), noisy, config);
    if (!align_dump.empty()) write_file(align_dump, dump_alignment(aligned.path));
    const Corpus out = transfer_labels(clean, noisy, aligned.path);
    ColumnSpec cols;
    cols.flag_column = 2;
    write_file(align_output, write_conll(out, cols));

    std::size_t flagged = 0;
    for (const auto& s : out.sentences)
      for (const auto& t : s.tokens)
        if (t.ocr_error) ++flagged;
    Summary("align-transfer")
        .add("sentences", out.sentences.size())
        .add("tokens", out.token_count())
        .add("flagged_tokens", flagged)
        .add("total_cost", aligned.path.total_cost)
        .add("windows", aligned.windows_aligned)
        .add("window_growths", aligned.growth_events)
        .add("low_quality_regions", aligned.low_quality.size())
        .print();
  });

  // --- eval ------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Exact-match chunk precision/recall/F1");
  InputOptions eval_in;
  std::string eval_json;
  std::string eval_gold, eval_pred;
  add_input_options(eval, eval_in);
  eval->add_option("--json", eval_json, "Also write the report as JSON");
  eval->add_option("gold", eval_gold, "Gold CoNLL file")->required();
  eval->add_option("pred", eval_pred, "Prediction CoNLL file")->required();
  eval->callback([&] {
    const Corpus gold = read_corpus(eval_gold, eval_in);
    const Corpus pred = read_corpus(eval_pred, eval_in);
    const EvalReport report = evaluate(gold, pred);
    std::cout << format_report(report);
    if (!eval_json.empty()) write_json(eval_json, to_json(report));
    Summary("eval")
        .add("tp", report.overall.tp)
        .add("fp", report.overall.fp)
        .add("fn", report.overall.fn)
        .add("precision", report.overall.precision())
        .add("recall", report.overall.recall())
        .add("f1", report.overall.f1())
        .print();
  });

  // --- eval-ocr-subset -------------------------------------------------
  auto* subset = app.add_subcommand(
      "eval-ocr-subset",
      "Chunk F1 restricted to gold entities containing at least one flagged token");
  InputOptions subset_in;
  std::string subset_json;
  std::string subset_gold, subset_pred;
  add_input_options(subset, subset_in, 2);
  subset->add_option("--json", subset_json, "Also write the report as JSON");
  subset->add_option("gold", subset_gold, "Gold CoNLL file carrying the ocr_error flag column")
      ->required();
  subset->add_option("pred", subset_pred, "Prediction CoNLL file (flag column ignored)")
      ->required();
  subset->callback([&] {
    const Corpus gold = read_corpus(subset_gold, subset_in);
    InputOptions pred_in = subset_in;
    pred_in.flag_column = -1;
    const Corpus pred = read_corpus(subset_pred, pred_in);
    const auto flags = flag_entity_ocr_errors(gold);
    std::size_t flagged = 0;
    for (const auto& [span, f] : flags)
      if (f) ++flagged;
    const EvalReport report = evaluate_subset(gold, pred, flags);
    std::cout << format_report(report);
    if (!subset_json.empty()) write_json(subset_json, to_json(report));
    Summary("eval-ocr-subset")
        .add("entities", flags.size())
        .add("flagged_entities", flagged)
        .add("tp", report.overall.tp)
        .add("fp", report.overall.fp)
        .add("fn", report.overall.fn)
        .add("precision", report.overall.precision())
        .add("recall", report.overall.recall())
        .add("f1", report.overall.f1())
        .print();
  });

  // --- sigtest ---------------------------------------------------------
  auto* sigtest = app.add_subcommand(
      "sigtest", "Approximate-randomization test of the overall-F1 gap between two systems");
  InputOptions sigtest_in;
  std::uint64_t sigtest_iterations = 1000;
  std::string sigtest_json;
  std::string sigtest_gold, sigtest_a, sigtest_b;
  add_input_options(sigtest, sigtest_in);
  sigtest->add_option("--iterations", sigtest_iterations, "Number of resamples")
      ->capture_default_str();
  sigtest->add_option("--json", sigtest_json, "Also write the result as JSON");
  sigtest->add_option("gold", sigtest_gold, "Gold CoNLL file")->required();
  sigtest->add_option("pred_a", sigtest_a, "System A predictions")->required();
  sigtest->add_option("pred_b", sigtest_b, "System B predictions")->required();
  sigtest->callback([&] {
    const Corpus gold = read_corpus(sigtest_gold, sigtest_in);
    const Corpus pred_a = read_corpus(sigtest_a, sigtest_in);
    const Corpus pred_b = read_corpus(sigtest_b, sigtest_in);
    const SigTestResult result = significance_test(gold, pred_a, pred_b, sigtest_iterations,
                                                   derive_seed(seed, "sigtest"));
    if (!sigtest_json.empty()) write_json(sigtest_json, to_json(result));
    Summary("sigtest")
        .add("observed_diff", result.observed_diff)
        .add("p_value", result.p_value)
        .add("iterations", std::size_t(result.iterations))
        .add("significant", result.p_value < 0.05)
        .print();
  });

  // --- stats -----------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  InputOptions stats_in;
  std::string stats_input;
  add_input_options(stats_cmd, stats_in);
  // Let global flags (--seed, --config) appear after the subcommand name.
  for (auto* sub : {convert, map_tags, split, downsample_cmd, corrupt, synocr, align, eval,
                    subset, sigtest, stats_cmd})
    sub->fallthrough();
  stats_cmd->add_option("input", stats_input, "Input CoNLL file")->required();
  stats_cmd->callback([&] {
    ParseStats parse_stats;
    const Corpus corpus = read_corpus(stats_input, stats_in, &parse_stats);
    const CorpusStats s = corpus_stats(corpus);
    Summary("stats")
        .add("sentences", s.sentence_count)
        .add("tokens", s.token_count)
        .add("entities", s.entity_count())
        .add("per", s.entity_counts.at(EntityType::PER))
        .add("org", s.entity_counts.at(EntityType::ORG))
        .add("loc", s.entity_counts.at(EntityType::LOC))
        .add("misc", s.entity_counts.at(EntityType::MISC))
        .add("scheme", scheme_to_string(parse_stats.detected_scheme))
        .add("repaired", parse_stats.repaired_labels)
        .print();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
