#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cometkit/evalset.hpp"
#include "cometkit/scorer.hpp"

namespace cometkit {

enum class MultiRefStrategy { max, avg, agg };

MultiRefStrategy parse_multiref_strategy(std::string_view name);
std::string_view to_string(MultiRefStrategy strategy);

inline constexpr std::size_t kAggPasses = 6;

// The six [src, hyp, ref] arrangements of (s, h, r, r̂), in scoring order:
// [s,h,r] [r,h,s] [s,h,r̂] [r̂,h,s] [r,h,r̂] [r̂,h,r].
std::array<ScoreRequest, kAggPasses> agg_arrangements(std::string_view src, std::string_view hyp,
                                                      std::string_view ref, std::string_view alt_ref);

// mean * (1 - population standard deviation) over the six pass scores.
double agg_combine(std::span<const double, kAggPasses> scores);

double multiref_max(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs);
double multiref_avg(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs);
double multiref_agg(const Backend& backend, std::string_view src, std::string_view hyp,
                    std::span<const std::string> refs);

// Per-segment strategy scores. All backend calls for the set go out as one batch.
ScoreTable evaluate_system_multiref(MultiRefStrategy strategy, const EvalSet& set, const Backend& backend);

}  // namespace cometkit
