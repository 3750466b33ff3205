#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cometkit/guards.hpp"
#include "cometkit/multiref.hpp"
#include "cometkit/provenance.hpp"
#include "cometkit/scorer.hpp"

namespace cometkit::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kConfigError = 2, kNoMatch = 3 };

// Everything the score pipeline needs; validate() runs before any work.
struct RunConfig {
  std::string src_path;
  std::string hyp_path;
  std::vector<std::string> ref_paths;
  std::string lang_pair;
  std::string system_name;

  std::string backend = "surrogate";
  std::string scores_path;
  std::string command;
  std::vector<std::string> env;  // KEY=VALUE
  std::size_t shard_size = 0;
  std::size_t jobs = 1;
  double w_ref = 0.9;
  double w_src = 0.1;

  bool guard_empty = false;
  bool guard_lang = false;
  std::string profiles_dir;
  std::size_t min_len = kDefaultMinLength;
  double min_margin = kDefaultMinMargin;

  std::optional<std::string> multiref;

  std::string out_path;
  std::string guard_report_path;

  std::string model;
  std::string precision = "unk";
  std::string interp{kUnknown};
  std::string framework{kUnknown};

  // Throws ConfigError.
  void validate() const;
  Backend make_backend() const;
  SignatureFields signature_fields() const;
};

// `# key<TAB>value` lines closing every output file.
std::string trailer(const std::string& signature, const std::string& command_line);

// Exact command line as a shell-quoted string.
std::string command_line(int argc, const char* const* argv);

int run_score(const RunConfig& config, const std::string& command_line, std::ostream& out, std::ostream& err);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cometkit::cli
