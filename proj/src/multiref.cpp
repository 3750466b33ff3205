#include "cometkit/multiref.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cometkit/error.hpp"

namespace cometkit {

namespace {

void require_refs(std::span<const std::string> refs, MultiRefStrategy strategy) {
  if (strategy == MultiRefStrategy::agg) {
    if (refs.size() != 2) throw Error("agg requires exactly two references");
  } else if (refs.empty()) {
    throw Error(std::string(to_string(strategy)) + " requires at least one reference");
  }
}

std::vector<ScoreRequest> segment_requests(MultiRefStrategy strategy, std::string_view src, std::string_view hyp,
                                           std::span<const std::string> refs) {
  require_refs(refs, strategy);
  if (strategy == MultiRefStrategy::agg) {
    auto passes = agg_arrangements(src, hyp, refs[0], refs[1]);
    return {std::make_move_iterator(passes.begin()), std::make_move_iterator(passes.end())};
  }
  std::vector<ScoreRequest> requests;
  for (const auto& ref : refs) requests.push_back({std::string(src), std::string(hyp), ref});
  return requests;
}

double combine(MultiRefStrategy strategy, std::span<const double> scores) {
  switch (strategy) {
    case MultiRefStrategy::max:
      return *std::max_element(scores.begin(), scores.end());
    case MultiRefStrategy::avg:
      return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    case MultiRefStrategy::agg:
      return agg_combine(scores.first<kAggPasses>());
  }
  throw Error("unknown multi-reference strategy");
}

double score_one(MultiRefStrategy strategy, const Backend& backend, std::string_view src, std::string_view hyp,
                 std::span<const std::string> refs) {
  const auto requests = segment_requests(strategy, src, hyp, refs);
  return combine(strategy, score_batch(backend, requests));
}

}  // namespace

MultiRefStrategy parse_multiref_strategy(std::string_view name) {
  if (name == "max") return MultiRefStrategy::max;
  if (name == "avg") return MultiRefStrategy::avg;
  if (name == "agg") return MultiRefStrategy::agg;
  throw ConfigError("unknown multi-reference strategy '" + std::string(name) + "' (expected max, avg or agg)");
}

std::string_view to_string(MultiRefStrategy strategy) {
  switch (strategy) {
    case MultiRefStrategy::max:
      return "max";
    case MultiRefStrategy::avg:
      return "avg";
    case MultiRefStrategy::agg:
      return "agg";
  }
  return "?";
}

std::array<ScoreRequest, kAggPasses> agg_arrangements(std::string_view src, std::string_view hyp,
                                                      std::string_view ref, std::string_view alt_ref) {
  auto req = [&](std::string_view s, std::string_view r) {
    return ScoreRequest{std::string(s), std::string(hyp), std::string(r)};
  };
  return {req(src, ref), req(ref, src), req(src, alt_ref), req(alt_ref, src), req(ref, alt_ref), req(alt_ref, ref)};
}

double agg_combine(std::span<const double, kAggPasses> passes) {
  // summing in sorted order makes the result independent of pass order
  std::array<double, kAggPasses> scores;
  std::copy(passes.begin(), passes.end(), scores.begin());
  std::sort(scores.begin(), scores.end());
  const double n = static_cast<double>(kAggPasses);
  // offset from the smallest score so a constant tuple yields its value exactly
  double offset_sum = 0.0;
  for (double s : scores) offset_sum += s - scores.front();
  const double mean = scores.front() + offset_sum / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sigma = std::sqrt(ss / n);
  return mean * (1.0 - sigma);
}

double multiref_max(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs) {
  return score_one(MultiRefStrategy::max, backend, src, hyp, refs);
}

double multiref_avg(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs) {
  return score_one(MultiRefStrategy::avg, backend, src, hyp, refs);
}

double multiref_agg(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs) {
  return score_one(MultiRefStrategy::agg, backend, src, hyp, refs);
}

ScoreTable evaluate_system_multiref(MultiRefStrategy strategy, const EvalSet& set, const Backend& backend) {
  if (std::holds_alternative<PrecomputedBackend>(backend)) {
    throw ConfigError("multi-reference scoring needs a live backend; precomputed tables hold one score per segment");
  }
  std::vector<ScoreRequest> requests;
  std::vector<std::size_t> offsets{0};
  for (const auto& seg : set.segments()) {
    auto reqs = segment_requests(strategy, seg.source, seg.hypothesis, seg.references);
    std::move(reqs.begin(), reqs.end(), std::back_inserter(requests));
    offsets.push_back(requests.size());
  }

  const auto scores = score_batch(backend, requests);
  std::vector<double> per_segment;
  per_segment.reserve(set.size());
  const std::span<const double> all(scores);
  for (std::size_t i = 0; i < set.size(); ++i) {
    per_segment.push_back(combine(strategy, all.subspan(offsets[i], offsets[i + 1] - offsets[i])));
  }
  return ScoreTable(set.system_name(), std::move(per_segment));
}

}  // namespace cometkit
