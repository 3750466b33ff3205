#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cometkit/evalset.hpp"
#include "cometkit/process.hpp"

namespace cometkit {

// One (source, hypothesis, reference) triple; no reference means QE mode.
struct ScoreRequest {
  std::string source;
  std::string hypothesis;
  std::optional<std::string> reference;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct SurrogateWeights {
  double ref = 0.9;
  double src = 0.1;
};

// Scores looked up by position in the batch.
struct PrecomputedBackend {
  std::map<std::size_t, double> scores;
  std::string origin = "precomputed table";
};

// A child process speaking the line protocol in namespace `wire`.
struct ExternalBackend {
  std::vector<std::string> argv;
  EnvOverrides env;
  std::size_t shard_size = 0;  // 0 = whole batch in one process
  std::size_t jobs = 1;        // concurrent process instances
};

// Character n-gram F-score stand-in for a neural metric.
struct SurrogateBackend {
  SurrogateWeights weights;
  std::size_t jobs = 1;
};

using Backend = std::variant<PrecomputedBackend, ExternalBackend, SurrogateBackend>;

// Throws ConfigError on negative weights or weights not summing to 1.
void validate(const SurrogateWeights& weights);
void validate(const Backend& backend);

// Mean over n = 1..4 of the character n-gram F1 between `a` and `b`; orders
// where neither side has n-grams are skipped, and a one-sided order scores 0.
double char_ngram_f(std::string_view a, std::string_view b);

double surrogate_score(const ScoreRequest& request, const SurrogateWeights& weights = {});

// One finite score per request, in request order. Requests must be all
// reference-based or all QE.
std::vector<double> score_batch(const Backend& backend, std::span<const ScoreRequest> requests);

// Requests for single-reference (or QE) scoring of every segment.
std::vector<ScoreRequest> make_requests(const EvalSet& set);

namespace wire {

// TAB -> \t, LF -> \n, backslash -> \\.
std::string escape(std::string_view text);
// Inverse of escape; throws Error on a dangling or unknown escape.
std::string unescape(std::string_view text);

// One protocol line, without the trailing newline.
std::string encode_request(const ScoreRequest& request);
// The whole stdin payload for a batch.
std::string encode_batch(std::span<const ScoreRequest> requests);
// Parses exactly `expected` numeric lines; throws Error naming the offending line.
std::vector<double> parse_responses(std::string_view output, std::size_t expected);

}  // namespace wire

}  // namespace cometkit
