#include "cometkit/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_map>

#include "cometkit/error.hpp"
#include "cometkit/utf8.hpp"

namespace cometkit {

namespace {

using GramCounts = std::unordered_map<std::u32string_view, std::size_t>;

GramCounts grams(std::u32string_view text, std::size_t n) {
  GramCounts counts;
  if (text.size() < n) return counts;
  for (std::size_t i = 0; i + n <= text.size(); ++i) ++counts[text.substr(i, n)];
  return counts;
}

// Contiguous [begin, end) ranges covering `total` items in chunks of `shard`.
std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t total, std::size_t shard) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (shard == 0) shard = std::max<std::size_t>(total, 1);
  for (std::size_t b = 0; b < total; b += shard) ranges.emplace_back(b, std::min(total, b + shard));
  return ranges;
}

// Runs `work` over the ranges with at most `jobs` in flight, writing into `out`.
template <typename Work>
void run_sharded(std::size_t total, std::size_t shard, std::size_t jobs, std::vector<double>& out, Work work) {
  const auto ranges = shard_ranges(total, shard);
  jobs = std::max<std::size_t>(jobs, 1);
  for (std::size_t wave = 0; wave < ranges.size(); wave += jobs) {
    std::vector<std::future<void>> pending;
    for (std::size_t r = wave; r < std::min(ranges.size(), wave + jobs); ++r) {
      pending.push_back(std::async(std::launch::async, [&, r] {
        const auto [b, e] = ranges[r];
        auto scores = work(b, e);
        std::copy(scores.begin(), scores.end(), out.begin() + static_cast<std::ptrdiff_t>(b));
      }));
    }
    // get() rethrows the first shard failure after all of this wave finished
    for (auto& f : pending) f.wait();
    for (auto& f : pending) f.get();
  }
}

void check_homogeneous(std::span<const ScoreRequest> requests) {
  if (requests.empty()) return;
  const bool has_ref = requests.front().reference.has_value();
  for (std::size_t i = 1; i < requests.size(); ++i) {
    if (requests[i].reference.has_value() != has_ref) {
      throw Error("score batch mixes reference-based and QE requests (request " + std::to_string(i) + ")");
    }
  }
}

std::vector<double> score_external(const ExternalBackend& backend, std::span<const ScoreRequest> requests,
                                   std::size_t offset) {
  const auto result = run_process(backend.argv, wire::encode_batch(requests), backend.env);
  if (!result.ok()) {
    throw Error("external scorer '" + backend.argv.front() + "' failed (" + result.describe() + ")");
  }
  try {
    return wire::parse_responses(result.out, requests.size());
  } catch (const Error& e) {
    throw Error("external scorer '" + backend.argv.front() + "', shard starting at request " +
                std::to_string(offset) + ": " + e.what());
  }
}

}  // namespace

void validate(const SurrogateWeights& weights) {
  if (!(weights.ref >= 0.0) || !(weights.src >= 0.0)) throw ConfigError("surrogate weights must be nonnegative");
  if (std::abs(weights.ref + weights.src - 1.0) > 1e-12) throw ConfigError("surrogate weights must sum to 1");
}

void validate(const Backend& backend) {
  if (const auto* s = std::get_if<SurrogateBackend>(&backend)) validate(s->weights);
  if (const auto* e = std::get_if<ExternalBackend>(&backend); e && e->argv.empty()) {
    throw ConfigError("external backend needs a command");
  }
}

double char_ngram_f(std::string_view a, std::string_view b) {
  const auto ua = utf8::decode(a);
  const auto ub = utf8::decode(b);
  double sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const bool has_a = ua.size() >= n;
    const bool has_b = ub.size() >= n;
    if (!has_a && !has_b) continue;
    ++orders;
    if (!has_a || !has_b) continue;
    const auto ga = grams(ua, n);
    const auto gb = grams(ub, n);
    std::size_t match = 0;
    for (const auto& [g, c] : ga) {
      if (const auto it = gb.find(g); it != gb.end()) match += std::min(c, it->second);
    }
    if (match == 0) continue;
    const double p = static_cast<double>(match) / static_cast<double>(ua.size() - n + 1);
    const double r = static_cast<double>(match) / static_cast<double>(ub.size() - n + 1);
    sum += 2.0 * p * r / (p + r);
  }
  return orders == 0 ? 0.0 : sum / static_cast<double>(orders);
}

double surrogate_score(const ScoreRequest& request, const SurrogateWeights& weights) {
  const double with_src = char_ngram_f(request.hypothesis, request.source);
  if (!request.reference) return with_src;
  return weights.ref * char_ngram_f(request.hypothesis, *request.reference) + weights.src * with_src;
}

std::vector<double> score_batch(const Backend& backend, std::span<const ScoreRequest> requests) {
  check_homogeneous(requests);
  std::vector<double> out(requests.size());
  if (requests.empty()) return out;

  if (const auto* pre = std::get_if<PrecomputedBackend>(&backend)) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      const auto it = pre->scores.find(i);
      if (it == pre->scores.end()) throw Error(pre->origin + ": no score for index " + std::to_string(i));
      out[i] = it->second;
    }
  } else if (const auto* ext = std::get_if<ExternalBackend>(&backend)) {
    run_sharded(requests.size(), ext->shard_size, ext->jobs, out, [&](std::size_t b, std::size_t e) {
      return score_external(*ext, requests.subspan(b, e - b), b);
    });
  } else {
    const auto& sur = std::get<SurrogateBackend>(backend);
    validate(sur.weights);
    const std::size_t jobs = std::max<std::size_t>(sur.jobs, 1);
    const std::size_t shard = (requests.size() + jobs - 1) / jobs;
    run_sharded(requests.size(), shard, jobs, out, [&](std::size_t b, std::size_t e) {
      std::vector<double> scores;
      scores.reserve(e - b);
      for (std::size_t i = b; i < e; ++i) scores.push_back(surrogate_score(requests[i], sur.weights));
      return scores;
    });
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) throw Error("backend returned a non-finite score for request " + std::to_string(i));
  }
  return out;
}

std::vector<ScoreRequest> make_requests(const EvalSet& set) {
  if (set.reference_count() > 1) {
    throw Error("evalset has " + std::to_string(set.reference_count()) +
                " references per segment; choose a multi-reference strategy");
  }
  std::vector<ScoreRequest> requests;
  requests.reserve(set.size());
  for (const auto& seg : set.segments()) {
    ScoreRequest req{seg.source, seg.hypothesis, std::nullopt};
    if (!seg.references.empty()) req.reference = seg.references.front();
    requests.push_back(std::move(req));
  }
  return requests;
}

namespace wire {

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 1 == text.size()) throw Error("dangling backslash in protocol field");
    switch (text[++i]) {
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      case '\\':
        out += '\\';
        break;
      default:
        throw Error(std::string("unknown escape '\\") + text[i] + "' in protocol field");
    }
  }
  return out;
}

std::string encode_request(const ScoreRequest& request) {
  std::string line = escape(request.source);
  line += '\t';
  line += escape(request.hypothesis);
  if (request.reference) {
    line += '\t';
    line += escape(*request.reference);
  }
  return line;
}

std::string encode_batch(std::span<const ScoreRequest> requests) {
  std::string payload;
  for (const auto& r : requests) {
    payload += encode_request(r);
    payload += '\n';
  }
  return payload;
}

std::vector<double> parse_responses(std::string_view output, std::size_t expected) {
  std::vector<double> scores;
  scores.reserve(expected);
  std::size_t start = 0;
  while (start < output.size()) {
    std::size_t end = output.find('\n', start);
    if (end == std::string_view::npos) end = output.size();
    std::string_view line = output.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_no = scores.size() + 1;
    if (line_no > expected) {
      throw Error("scorer wrote more than the expected " + std::to_string(expected) + " response lines");
    }
    scores.push_back(parse_score(line, "response line " + std::to_string(line_no)));
    start = end + 1;
  }
  if (scores.size() != expected) {
    throw Error("scorer wrote " + std::to_string(scores.size()) + " response lines for " + std::to_string(expected) +
                " requests; response line " + std::to_string(scores.size() + 1) + " is missing");
  }
  return scores;
}

}  // namespace wire

}  // namespace cometkit
