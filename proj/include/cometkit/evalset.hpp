#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cometkit {

// A translation direction such as en-de.
struct Direction {
  std::string src_lang;
  std::string tgt_lang;

  // Throws ConfigError unless both codes are non-empty lowercase ASCII letters.
  static Direction make(std::string src, std::string tgt, bool allow_same = false);
  // Parses "en-de".
  static Direction parse(std::string_view pair, bool allow_same = false);

  std::string str() const { return src_lang + "-" + tgt_lang; }

  friend bool operator==(const Direction&, const Direction&) = default;
  friend auto operator<=>(const Direction&, const Direction&) = default;
};

struct Segment {
  std::size_t index = 0;
  std::string source;
  std::string hypothesis;
  std::vector<std::string> references;

  friend bool operator==(const Segment&, const Segment&) = default;
};

class EvalSet {
 public:
  // Validates contiguous indices and a uniform reference count.
  EvalSet(Direction direction, std::string system_name, std::vector<Segment> segments);

  const Direction& direction() const { return direction_; }
  const std::string& system_name() const { return system_name_; }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  std::size_t reference_count() const { return segments_.empty() ? 0 : segments_.front().references.size(); }

  friend bool operator==(const EvalSet&, const EvalSet&) = default;

 private:
  Direction direction_;
  std::string system_name_;
  std::vector<Segment> segments_;
};

enum class GuardFlag { none, empty, lang };

std::string_view to_string(GuardFlag flag);

// Per-segment scores for one system. Position i holds the score of segment i.
class ScoreTable {
 public:
  ScoreTable() = default;
  // Throws Error on a non-finite score or a flags/scores length mismatch.
  // Empty `flags` means all none.
  ScoreTable(std::string system_name, std::vector<double> scores, std::vector<GuardFlag> flags = {});

  const std::string& system_name() const { return system_name_; }
  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  double score(std::size_t index) const { return scores_.at(index); }
  GuardFlag flag(std::size_t index) const { return flags_.at(index); }
  std::span<const double> scores() const { return scores_; }
  std::span<const GuardFlag> flags() const { return flags_; }

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;

 private:
  std::string system_name_;
  std::vector<double> scores_;
  std::vector<GuardFlag> flags_;
};

// Reads a UTF-8 text file, one entry per line. LF and CRLF endings are
// accepted; a trailing newline does not produce an extra empty line.
// Throws Error naming the line of the first undecodable byte.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Splits already-loaded text the same way read_lines does; `origin` names
// the source in error messages.
std::vector<std::string> split_lines(std::string_view text, std::string_view origin);

EvalSet load_evalset(const std::filesystem::path& src_path, const std::filesystem::path& hyp_path,
                     std::span<const std::filesystem::path> ref_paths, Direction direction,
                     std::string system_name);

// Writes the columns back as line files: source, hypothesis, ref0, ref1, ...
void write_evalset_columns(const EvalSet& set, const std::filesystem::path& src_path,
                           const std::filesystem::path& hyp_path,
                           std::span<const std::filesystem::path> ref_paths);

// Arithmetic mean of the segment scores. Throws Error on an empty table.
double system_score(const ScoreTable& table);

// Throws Error unless the table has exactly one score per segment of `set`.
void check_aligned(const EvalSet& set, const ScoreTable& table);

// Shortest decimal that parses back to exactly `value`.
std::string format_score(double value);
// Parses a whole string as a finite double; throws Error mentioning `what`.
double parse_score(std::string_view text, std::string_view what);

// `index<TAB>score` lines. Lines starting with '#' and blank lines are skipped.
std::string render_score_tsv(const ScoreTable& table);
std::map<std::size_t, double> parse_score_map(std::string_view text, std::string_view origin);
std::map<std::size_t, double> read_score_map(const std::filesystem::path& path);
// Like read_score_map but requires indices 0..n-1 each exactly once.
ScoreTable read_score_table(const std::filesystem::path& path, std::string system_name);
ScoreTable score_table_from_map(const std::map<std::size_t, double>& scores, std::string system_name,
                                std::string_view origin);

// File helpers shared by the CLI and tests.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cometkit
