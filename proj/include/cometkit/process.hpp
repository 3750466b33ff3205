#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cometkit {

struct ProcessResult {
  int exit_code = -1;   // valid when term_signal == 0
  int term_signal = 0;  // nonzero if the child was killed by a signal
  bool timed_out = false;
  std::string out;
  std::string err;

  bool ok() const { return term_signal == 0 && !timed_out && exit_code == 0; }
  std::string describe() const;
};

using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

// Runs argv[0] (PATH lookup) with `input` on stdin and captures stdout and
// stderr. The parent environment is inherited, with `env` entries added or
// replaced. Throws Error only if the child cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input, const EnvOverrides& env = {},
                          std::optional<std::chrono::milliseconds> timeout = std::nullopt);

// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view command);

// Quotes one argument for a POSIX shell, leaving plain words untouched.
std::string shell_quote(std::string_view arg);

}  // namespace cometkit
