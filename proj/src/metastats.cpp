#include "cometkit/metastats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "cometkit/error.hpp"
#include "cometkit/evalset.hpp"

namespace cometkit {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, std::string_view what,
                         std::size_t min_n) {
  if (a.size() != b.size()) {
    throw Error(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  if (a.size() < min_n) {
    throw Error(std::string(what) + ": needs at least " + std::to_string(min_n) + " values, got " +
                std::to_string(a.size()));
  }
}

std::int64_t tied_pairs(std::span<const double> sorted) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  return ties;
}

// Sorts `v` in place, returning the number of inversions (strictly greater before smaller).
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::size_t distinct_count(std::span<const double> v) { return std::set<double>(v.begin(), v.end()).size(); }

int order(double a, double b) { return (a > b) - (a < b); }

}  // namespace

void SystemRanking::validate() const {
  std::set<std::string_view> names;
  for (const auto& [name, score] : entries) {
    if (!names.insert(name).second) throw Error("ranking: duplicate system '" + name + "'");
    if (!std::isfinite(score)) throw Error("ranking: non-finite score for system '" + name + "'");
  }
}

SystemRanking parse_ranking(std::string_view text, std::string_view origin) {
  SystemRanking ranking;
  const auto lines = split_lines(text, origin);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto& line = lines[ln];
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = std::string(origin) + " line " + std::to_string(ln + 1);
    if (tab == std::string::npos) throw Error(where + ": expected 'system<TAB>score'");
    ranking.entries.emplace_back(line.substr(0, tab), parse_score(std::string_view(line).substr(tab + 1), where));
  }
  ranking.validate();
  return ranking;
}

SystemRanking read_ranking(const std::filesystem::path& path) { return parse_ranking(read_file(path), path.string()); }

double mae(std::span<const double> pred, std::span<const double> gold) {
  require_same_length(pred, gold, "mae", 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - gold[i]);
  return sum / static_cast<double>(pred.size());
}

std::int64_t concordance_difference(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "kendall tau", 2);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  // pairs tied in both x and y
  std::int64_t joint = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
      ++run;
    } else {
      joint += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  const std::int64_t x_ties = tied_pairs(xs);
  std::vector<double> tmp(n);
  const std::int64_t swaps = merge_count(ys, tmp, 0, n);
  const std::int64_t y_ties = tied_pairs(ys);
  const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
  // Knight's identity: C - D = n0 - n1 - n2 + n3 - 2 * swaps
  return total - x_ties - y_ties + joint - 2 * swaps;
}

double kendall_tau_a(std::span<const double> x, std::span<const double> y) {
  const auto diff = concordance_difference(x, y);
  const double n = static_cast<double>(x.size());
  return static_cast<double>(diff) / (n * (n - 1.0) / 2.0);
}

double kendall_tau_c(std::span<const double> x, std::span<const double> y) {
  const auto diff = concordance_difference(x, y);
  const double m = static_cast<double>(std::min(distinct_count(x), distinct_count(y)));
  if (m == 1.0) return 0.0;
  const double n = static_cast<double>(x.size());
  return static_cast<double>(diff) * 2.0 * m / (n * n * (m - 1.0));
}

double pairwise_accuracy(const SystemRanking& metric, const SystemRanking& human) {
  metric.validate();
  human.validate();
  if (metric.entries.size() != human.entries.size()) throw Error("pairwise accuracy: rankings cover different system sets");
  if (metric.entries.size() < 2) throw Error("pairwise accuracy: needs at least two systems");
  std::map<std::string_view, double> human_by_name;
  for (const auto& [name, score] : human.entries) human_by_name.emplace(name, score);

  std::vector<std::pair<double, double>> paired;
  for (const auto& [name, score] : metric.entries) {
    const auto it = human_by_name.find(name);
    if (it == human_by_name.end()) throw Error("pairwise accuracy: system '" + name + "' missing from human ranking");
    paired.emplace_back(score, it->second);
  }
  std::size_t agree = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < paired.size(); ++i) {
    for (std::size_t j = i + 1; j < paired.size(); ++j) {
      ++total;
      agree += order(paired[i].first, paired[j].first) == order(paired[i].second, paired[j].second);
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

WorseThanEmpty worse_than_empty(std::span<const double> sys_scores, std::span<const double> empty_scores) {
  require_same_length(sys_scores, empty_scores, "worse_than_empty", 0);
  WorseThanEmpty result{0, sys_scores.size()};
  for (std::size_t i = 0; i < sys_scores.size(); ++i) result.count += sys_scores[i] < empty_scores[i];
  return result;
}

std::vector<HistogramBin> histogram(std::span<const double> scores, std::size_t bin_count, double lo, double hi) {
  if (bin_count == 0) throw Error("histogram: bin_count must be at least 1");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw Error("histogram: need finite lo < hi");
  const double width = (hi - lo) / static_cast<double>(bin_count);
  std::vector<HistogramBin> bins(bin_count);
  for (std::size_t k = 0; k < bin_count; ++k) bins[k].center = lo + (static_cast<double>(k) + 0.5) * width;
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error("histogram: non-finite score");
    const double pos = std::floor((s - lo) / width);
    std::size_t k = 0;
    if (pos >= static_cast<double>(bin_count)) {
      k = bin_count - 1;
    } else if (pos > 0) {
      k = static_cast<std::size_t>(pos);
    }
    ++bins[k].count;
  }
  return bins;
}

RunComparison compare_runs(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "compare_runs", 1);
  RunComparison cmp;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    sum += d;
    cmp.max_abs_diff = std::max(cmp.max_abs_diff, d);
  }
  cmp.mae = sum / static_cast<double>(a.size());
  return cmp;
}

MetaReport meta_evaluate(std::span<const double> pred, std::span<const double> gold, const SystemRanking* metric,
                         const SystemRanking* human) {
  MetaReport report;
  report.mae = mae(pred, gold);
  report.n = pred.size();
  if (pred.size() >= 2) {
    report.tau_a = kendall_tau_a(pred, gold);
    report.tau_c = kendall_tau_c(pred, gold);
  }
  if (metric && human) report.pairwise_acc = pairwise_accuracy(*metric, *human);
  return report;
}

namespace {

std::vector<std::pair<std::string, std::string>> report_fields(const MetaReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_score(*v) : std::string("n/a"); };
  return {{"n", std::to_string(r.n)},
          {"mae", format_score(r.mae)},
          {"tau_a", opt(r.tau_a)},
          {"tau_c", opt(r.tau_c)},
          {"pairwise_acc", opt(r.pairwise_acc)}};
}

}  // namespace

std::string render_meta_report(const MetaReport& report) {
  std::string out;
  for (const auto& [k, v] : report_fields(report)) {
    out += k;
    out.append(14 - k.size(), ' ');
    out += v;
    out += '\n';
  }
  return out;
}

std::string render_meta_report_tsv(const MetaReport& report) {
  std::string out;
  for (const auto& [k, v] : report_fields(report)) out += k + "\t" + v + "\n";
  return out;
}

}  // namespace cometkit
