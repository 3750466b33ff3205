#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cometkit {

struct SystemRanking {
  std::vector<std::pair<std::string, double>> entries;

  // Throws Error on duplicate system names or non-finite scores.
  void validate() const;
};

// Parses `system<TAB>score` lines ('#' comments allowed).
SystemRanking parse_ranking(std::string_view text, std::string_view origin);
SystemRanking read_ranking(const std::filesystem::path& path);

struct MetaReport {
  double mae = 0.0;
  std::optional<double> tau_a;
  std::optional<double> tau_c;
  std::optional<double> pairwise_acc;
  std::size_t n = 0;
};

// Mean absolute error in the units of the inputs.
double mae(std::span<const double> pred, std::span<const double> gold);

// Concordant minus discordant pairs, O(n log n).
std::int64_t concordance_difference(std::span<const double> x, std::span<const double> y);

double kendall_tau_a(std::span<const double> x, std::span<const double> y);
// Stuart's tau-c with m = min(#distinct x, #distinct y); 0 when m == 1.
double kendall_tau_c(std::span<const double> x, std::span<const double> y);

// Share of system pairs both rankings order the same way (a tie agrees only with a tie).
double pairwise_accuracy(const SystemRanking& metric, const SystemRanking& human);

struct WorseThanEmpty {
  std::size_t count = 0;
  std::size_t total = 0;

  std::string str() const { return std::to_string(count) + " / " + std::to_string(total); }
};

WorseThanEmpty worse_than_empty(std::span<const double> sys_scores, std::span<const double> empty_scores);

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
};

// Uniform bins over [lo, hi]; out-of-range scores land in the end bins.
std::vector<HistogramBin> histogram(std::span<const double> scores, std::size_t bin_count, double lo, double hi);

struct RunComparison {
  double mae = 0.0;
  double max_abs_diff = 0.0;
};

RunComparison compare_runs(std::span<const double> a, std::span<const double> b);

// Segment-level MAE and tau statistics; pairwise accuracy when both rankings are given.
MetaReport meta_evaluate(std::span<const double> pred, std::span<const double> gold,
                         const SystemRanking* metric = nullptr, const SystemRanking* human = nullptr);

// Aligned `key  value` lines.
std::string render_meta_report(const MetaReport& report);
// `key<TAB>value` lines.
std::string render_meta_report_tsv(const MetaReport& report);

}  // namespace cometkit
