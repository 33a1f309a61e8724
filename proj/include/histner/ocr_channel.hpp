#pragma once

// OCR-like noisification of clean corpora. Two channels share one output
// contract (raw text, one line per sentence, no labels):
//   * simulate_ocr  - hermetic stochastic channel: confusion-table
//     substitutions, deletions, speck insertions, space splits/merges, and
//     whole-line "illegible" garble.
//   * external_ocr  - hands sentence batches to a user-supplied command
//     (e.g. a render-to-image + OCR-engine pipeline) over stdin/stdout.

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "histner/corpus.hpp"
#include "histner/rng.hpp"
#include "histner/utf8.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace histner {

/// Weighted replacement options for a 1- or 2-character source sequence.
using ConfusionTable = std::map<std::u32string, std::vector<std::pair<std::u32string, double>>>;

struct OcrNoiseConfig {
  ConfusionTable substitution_table;
  double p_substitute = 0.02;
  double p_delete = 0.005;
  double p_insert = 0.005;
  double p_space_split = 0.01;
  double p_space_merge = 0.01;
  double p_illegible_line = 0.01;
  std::u32string garble_alphabet = U"-—~#*·:";  // dashes and metasymbols
  std::uint64_t seed = 0;

  /// Calibration defaults with the classic OCR confusions.
  static OcrNoiseConfig defaults() {
    OcrNoiseConfig c;
    auto add = [&c](const char32_t* from, const char32_t* to) {
      c.substitution_table[from].emplace_back(to, 1.0);
    };
    add(U"e", U"c");
    add(U"c", U"e");
    add(U"l", U"1");
    add(U"1", U"l");
    add(U"o", U"0");
    add(U"0", U"o");
    add(U"rn", U"m");
    add(U"in", U"m");
    add(U"f", U"t");
    add(U"t", U"f");
    add(U"h", U"b");
    return c;
  }

  void validate() const {
    for (double p : {p_substitute, p_delete, p_insert, p_space_split, p_space_merge,
                     p_illegible_line}) {
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("OCR channel probabilities must be in [0,1]");
    }
    if (garble_alphabet.empty())
      throw std::invalid_argument("garble alphabet is empty");
    for (const auto& [key, repls] : substitution_table) {
      if (key.empty() || key.size() > 2)
        throw std::invalid_argument("confusion-table keys must be 1 or 2 characters");
      for (const auto& [repl, weight] : repls) {
        (void)repl;
        if (!(weight > 0.0))
          throw std::invalid_argument("confusion-table weights must be positive");
      }
    }
  }
};

/// Confusion-table file: "source<TAB>replacement<TAB>weight" per line.
/// An empty replacement field means deletion of the source sequence.
inline ConfusionTable load_confusion_table(std::istream& in) {
  ConfusionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error("confusion table line " + std::to_string(line_no) +
                               ": expected source<TAB>replacement<TAB>weight");
    auto source = decode_utf8(std::string_view(line).substr(0, t1));
    auto repl = decode_utf8(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    double weight = 0;
    try {
      weight = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("confusion table line " + std::to_string(line_no) +
                               ": bad weight");
    }
    if (source.empty() || source.size() > 2 || !(weight > 0))
      throw std::runtime_error("confusion table line " + std::to_string(line_no) +
                               ": source must be 1-2 chars and weight positive");
    table[source].emplace_back(repl, weight);
  }
  return table;
}

/// Per-sentence provenance of simulator output: for every emitted code point,
/// the index of the clean code point it derives from, or -1 for insertions.
/// Lets tests and calibration recover the true source token of every noisy
/// token without going through the aligner.
struct OcrTrace {
  std::vector<std::vector<std::int64_t>> char_sources;
};

namespace detail {

inline const std::u32string* pick_replacement(
    const std::vector<std::pair<std::u32string, double>>& options, SplitMix64& rng) {
  double total = 0;
  for (const auto& [repl, w] : options) total += w;
  double x = rng.next_double() * total;
  for (const auto& [repl, w] : options) {
    x -= w;
    if (x <= 0) return &repl;
  }
  return &options.back().first;
}

}  // namespace detail

/// Runs the stochastic OCR channel over a corpus. Output is one line per
/// sentence (tokens space-separated, labels dropped), deterministic per
/// (corpus, config): each sentence's randomness depends only on
/// (config.seed, sentence index).
inline std::string simulate_ocr(const Corpus& corpus, const OcrNoiseConfig& config,
                                OcrTrace* trace = nullptr) {
  config.validate();
  std::u32string out;
  if (trace) trace->char_sources.assign(corpus.sentences.size(), {});

  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const std::u32string clean = sentence_text(corpus.sentences[si]);
    const std::size_t n = clean.size();
    SplitMix64 rng(combine_seed(config.seed, si));
    std::u32string line;
    std::vector<std::int64_t> sources;
    auto emit = [&](char32_t c, std::int64_t src) {
      line.push_back(c);
      sources.push_back(src);
    };

    if (rng.next_bool(config.p_illegible_line)) {
      // Whole line garbled; length preserved so alignment windows stay sane.
      for (std::size_t i = 0; i < n; ++i)
        emit(config.garble_alphabet[rng.next_below(config.garble_alphabet.size())],
             static_cast<std::int64_t>(i));
    } else {
      std::size_t i = 0;
      // Gap before the first character.
      if (rng.next_bool(config.p_insert))
        emit(config.garble_alphabet[rng.next_below(config.garble_alphabet.size())], -1);
      while (i < n) {
        const char32_t c = clean[i];
        if (c == U' ') {
          if (rng.next_bool(config.p_space_merge)) {
            ++i;  // merge: drop the inter-token space
          } else {
            emit(U' ', static_cast<std::int64_t>(i));
            ++i;
          }
        } else {
          bool substituted = false;
          if (rng.next_bool(config.p_substitute) && !config.substitution_table.empty()) {
            // Longest match first: 2-character rules, then 1-character.
            for (std::size_t len : {std::size_t{2}, std::size_t{1}}) {
              if (i + len > n) continue;
              auto it = config.substitution_table.find(clean.substr(i, len));
              if (it == config.substitution_table.end()) continue;
              const std::u32string* repl = detail::pick_replacement(it->second, rng);
              for (std::size_t k = 0; k < repl->size(); ++k)
                emit((*repl)[k], static_cast<std::int64_t>(
                                     i + std::min(k, len - 1)));
              i += len;
              substituted = true;
              break;
            }
          }
          if (!substituted) {
            if (rng.next_bool(config.p_delete)) {
              ++i;  // character lost
            } else {
              emit(c, static_cast<std::int64_t>(i));
              ++i;
            }
          }
        }
        // Gap after the consumed position: speck insertion, then a possible
        // space split when strictly inside a token.
        if (rng.next_bool(config.p_insert))
          emit(config.garble_alphabet[rng.next_below(config.garble_alphabet.size())], -1);
        if (i > 0 && i < n && clean[i - 1] != U' ' && clean[i] != U' ' &&
            rng.next_bool(config.p_space_split))
          emit(U' ', -1);
      }
    }
    out += line;
    out.push_back(U'\n');
    if (trace) trace->char_sources[si] = std::move(sources);
  }
  return encode_utf8(out);
}

// ---------------------------------------------------------------------------
// External channel

struct ExternalPipelineConfig {
  /// Shell command reading clean plain text on stdin and writing recognized
  /// text on stdout; nonzero exit means failure.
  std::string channel_command;
  std::size_t batch_size_sentences = 150;
  double timeout_seconds = 300.0;

  void validate() const {
    if (channel_command.empty()) throw std::invalid_argument("channel command is empty");
    if (batch_size_sentences < 1) throw std::invalid_argument("batch size must be >= 1");
  }
};

class ExternalChannelError : public std::runtime_error {
 public:
  ExternalChannelError(std::size_t batch, const std::string& what)
      : std::runtime_error("ocr channel batch " + std::to_string(batch) + ": " + what),
        batch_(batch) {}
  std::size_t batch() const { return batch_; }

 private:
  std::size_t batch_;
};

namespace detail {

struct CommandResult {
  std::string output;
  int exit_code = -1;
  bool timed_out = false;
};

/// Runs `command` through /bin/sh, feeding `input` on stdin and collecting
/// stdout, with a wall-clock timeout. Both pipes are serviced from one poll
/// loop so large inputs cannot deadlock.
inline CommandResult run_command(const std::string& command, const std::string& input,
                                 double timeout_seconds) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw std::runtime_error("pipe() failed: " + std::string(std::strerror(errno)));

  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork() failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);

  // A child that stops reading early (e.g. `head`) must surface as a short
  // write, not kill this process with SIGPIPE.
  struct sigaction ignore_pipe {};
  ignore_pipe.sa_handler = SIG_IGN;
  struct sigaction saved_pipe {};
  sigaction(SIGPIPE, &ignore_pipe, &saved_pipe);

  CommandResult result;
  std::size_t written = 0;
  bool stdin_open = true;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_seconds));
  char buf[65536];

  while (true) {
    pollfd fds[2];
    nfds_t nfds = 0;
    int out_idx = -1, in_idx = -1;
    fds[nfds] = {out_pipe[0], POLLIN, 0};
    out_idx = static_cast<int>(nfds++);
    if (stdin_open) {
      fds[nfds] = {in_pipe[1], POLLOUT, 0};
      in_idx = static_cast<int>(nfds++);
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = poll(fds, nfds, static_cast<int>(std::min<long long>(left, 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
        close(in_pipe[1]);
        stdin_open = false;
      } else {
        const ssize_t w = write(in_pipe[1], input.data() + written,
                                std::min<std::size_t>(input.size() - written, sizeof buf));
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN && errno != EINTR) {
          close(in_pipe[1]);
          stdin_open = false;
        }
        if (written == input.size()) {
          close(in_pipe[1]);
          stdin_open = false;
        }
      }
    }
    if (fds[out_idx].revents & (POLLIN | POLLHUP)) {
      const ssize_t r = read(out_pipe[0], buf, sizeof buf);
      if (r > 0) {
        result.output.append(buf, static_cast<std::size_t>(r));
        continue;
      }
      if (r == 0) break;  // EOF
      if (errno != EAGAIN && errno != EINTR) break;
    }
  }
  if (stdin_open) close(in_pipe[1]);
  close(out_pipe[0]);
  sigaction(SIGPIPE, &saved_pipe, nullptr);

  if (result.timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    return result;
  }
  int status = 0;
  waitpid(pid, &status, 0);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

}  // namespace detail

/// Serializes the corpus in batches of `batch_size_sentences` lines, pipes
/// each batch through the channel command, and concatenates the outputs in
/// batch order. The number of output lines may differ from the input; the
/// aligner downstream absorbs that. Throws ExternalChannelError naming the
/// batch on command failure or timeout; an empty output for a non-empty
/// batch is kept (with a warning on stderr).
inline std::string external_ocr(const Corpus& corpus, const ExternalPipelineConfig& config,
                                std::ostream* warnings = nullptr) {
  config.validate();
  std::string out;
  const std::size_t n = corpus.sentences.size();
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < n; start += config.batch_size_sentences, ++batch_index) {
    const std::size_t end = std::min(n, start + config.batch_size_sentences);
    std::u32string batch_text;
    for (std::size_t i = start; i < end; ++i) {
      batch_text += sentence_text(corpus.sentences[i]);
      batch_text.push_back(U'\n');
    }
    auto result = detail::run_command(config.channel_command, encode_utf8(batch_text),
                                      config.timeout_seconds);
    if (result.timed_out)
      throw ExternalChannelError(batch_index, "timed out after " +
                                                  std::to_string(config.timeout_seconds) + "s");
    if (result.exit_code != 0)
      throw ExternalChannelError(batch_index,
                                 "command exited with status " + std::to_string(result.exit_code));
    if (result.output.empty()) {
      if (warnings)
        *warnings << "warning: ocr channel batch " << batch_index << " produced no output\n";
    } else {
      out += result.output;
      if (out.back() != '\n') out.push_back('\n');
    }
  }
  return out;
}

}  // namespace histner
