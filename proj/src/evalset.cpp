#include "cometkit/evalset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cometkit/error.hpp"
#include "cometkit/utf8.hpp"

namespace cometkit {

namespace {

bool valid_lang_code(std::string_view code) {
  return !code.empty() && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

Direction Direction::make(std::string src, std::string tgt, bool allow_same) {
  if (!valid_lang_code(src) || !valid_lang_code(tgt)) {
    throw ConfigError("invalid language code in direction '" + src + "-" + tgt +
                      "': codes must be non-empty lowercase ASCII");
  }
  if (src == tgt && !allow_same) {
    throw ConfigError("direction '" + src + "-" + tgt + "' has identical source and target language");
  }
  return Direction{std::move(src), std::move(tgt)};
}

Direction Direction::parse(std::string_view pair, bool allow_same) {
  const auto dash = pair.find('-');
  if (dash == std::string_view::npos) {
    throw ConfigError("direction must look like 'en-de', got '" + std::string(pair) + "'");
  }
  return make(std::string(pair.substr(0, dash)), std::string(pair.substr(dash + 1)), allow_same);
}

EvalSet::EvalSet(Direction direction, std::string system_name, std::vector<Segment> segments)
    : direction_(std::move(direction)), system_name_(std::move(system_name)), segments_(std::move(segments)) {
  if (system_name_.empty()) throw Error("evalset: system name must be non-empty");
  const std::size_t refs = reference_count();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].index != i) {
      throw Error("evalset: segment indices must be contiguous from 0 (position " + std::to_string(i) +
                  " has index " + std::to_string(segments_[i].index) + ")");
    }
    if (segments_[i].references.size() != refs) {
      throw Error("evalset: segment " + std::to_string(i) + " has " +
                  std::to_string(segments_[i].references.size()) + " references, expected " +
                  std::to_string(refs));
    }
  }
}

std::string_view to_string(GuardFlag flag) {
  switch (flag) {
    case GuardFlag::empty:
      return "empty-guarded";
    case GuardFlag::lang:
      return "lang-guarded";
    case GuardFlag::none:
      break;
  }
  return "none";
}

ScoreTable::ScoreTable(std::string system_name, std::vector<double> scores, std::vector<GuardFlag> flags)
    : system_name_(std::move(system_name)), scores_(std::move(scores)), flags_(std::move(flags)) {
  if (flags_.empty()) flags_.assign(scores_.size(), GuardFlag::none);
  if (flags_.size() != scores_.size()) {
    throw Error("score table: " + std::to_string(flags_.size()) + " flags for " +
                std::to_string(scores_.size()) + " scores");
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (!std::isfinite(scores_[i])) throw Error("score table: score at index " + std::to_string(i) + " is not finite");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<std::string> split_lines(std::string_view text, std::string_view origin) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    const bool last = end == std::string_view::npos;
    if (last) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto bad = utf8::find_invalid(line); bad != std::string_view::npos) {
      throw Error(std::string(origin) + ": undecodable UTF-8 at line " + std::to_string(lines.size() + 1) +
                  ", byte " + std::to_string(bad + 1));
    }
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  return split_lines(read_file(path), path.string());
}

EvalSet load_evalset(const std::filesystem::path& src_path, const std::filesystem::path& hyp_path,
                     std::span<const std::filesystem::path> ref_paths, Direction direction,
                     std::string system_name) {
  std::vector<std::filesystem::path> paths{src_path, hyp_path};
  paths.insert(paths.end(), ref_paths.begin(), ref_paths.end());
  std::vector<std::vector<std::string>> columns;
  columns.reserve(paths.size());
  for (const auto& p : paths) columns.push_back(read_lines(p));

  const bool mismatch = std::any_of(columns.begin(), columns.end(),
                                    [&](const auto& c) { return c.size() != columns.front().size(); });
  if (mismatch) {
    std::string msg = "line count mismatch:";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      msg += " " + paths[i].string() + "=" + std::to_string(columns[i].size());
    }
    throw Error(msg);
  }

  std::vector<Segment> segments(columns.front().size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    Segment& seg = segments[i];
    seg.index = i;
    seg.source = std::move(columns[0][i]);
    seg.hypothesis = std::move(columns[1][i]);
    for (std::size_t k = 2; k < columns.size(); ++k) seg.references.push_back(std::move(columns[k][i]));
  }
  return EvalSet(std::move(direction), std::move(system_name), std::move(segments));
}

void write_evalset_columns(const EvalSet& set, const std::filesystem::path& src_path,
                           const std::filesystem::path& hyp_path,
                           std::span<const std::filesystem::path> ref_paths) {
  if (ref_paths.size() != set.reference_count()) {
    throw Error("write_evalset_columns: " + std::to_string(ref_paths.size()) + " reference paths for " +
                std::to_string(set.reference_count()) + " references");
  }
  auto column = [&](auto&& get) {
    std::string text;
    for (const auto& seg : set.segments()) {
      text += get(seg);
      text += '\n';
    }
    return text;
  };
  write_file(src_path, column([](const Segment& s) -> const std::string& { return s.source; }));
  write_file(hyp_path, column([](const Segment& s) -> const std::string& { return s.hypothesis; }));
  for (std::size_t k = 0; k < ref_paths.size(); ++k) {
    write_file(ref_paths[k], column([k](const Segment& s) -> const std::string& { return s.references[k]; }));
  }
}

double system_score(const ScoreTable& table) {
  if (table.empty()) throw Error("system score of an empty score table is undefined");
  const auto scores = table.scores();
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

void check_aligned(const EvalSet& set, const ScoreTable& table) {
  if (set.size() != table.size()) {
    throw Error("score table '" + table.system_name() + "' has " + std::to_string(table.size()) +
                " scores but the evalset has " + std::to_string(set.size()) + " segments");
  }
}

std::string format_score(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_score(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || first == last || !std::isfinite(value)) {
    throw Error(std::string(what) + ": expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string render_score_tsv(const ScoreTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += format_score(table.score(i));
    out += '\n';
  }
  return out;
}

std::map<std::size_t, double> parse_score_map(std::string_view text, std::string_view origin) {
  std::map<std::size_t, double> scores;
  const auto lines = split_lines(text, origin);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(origin) + " line " + std::to_string(ln + 1);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(where + ": expected 'index<TAB>score'");
    std::string_view idx_text = line.substr(0, tab);
    std::string_view score_text = line.substr(tab + 1);
    // tolerate extra columns after the score
    if (const auto tab2 = score_text.find('\t'); tab2 != std::string_view::npos) score_text = score_text.substr(0, tab2);
    std::size_t index = 0;
    const auto res = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
    if (res.ec != std::errc() || res.ptr != idx_text.data() + idx_text.size() || idx_text.empty()) {
      throw Error(where + ": bad index '" + std::string(idx_text) + "'");
    }
    const double score = parse_score(score_text, where);
    if (!scores.emplace(index, score).second) throw Error(where + ": duplicate index " + std::to_string(index));
  }
  return scores;
}

std::map<std::size_t, double> read_score_map(const std::filesystem::path& path) {
  return parse_score_map(read_file(path), path.string());
}

ScoreTable score_table_from_map(const std::map<std::size_t, double>& scores, std::string system_name,
                                std::string_view origin) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& [index, score] : scores) {
    if (index != values.size()) {
      throw Error(std::string(origin) + ": missing score for index " + std::to_string(values.size()));
    }
    values.push_back(score);
  }
  return ScoreTable(std::move(system_name), std::move(values));
}

ScoreTable read_score_table(const std::filesystem::path& path, std::string system_name) {
  return score_table_from_map(read_score_map(path), std::move(system_name), path.string());
}

}  // namespace cometkit
