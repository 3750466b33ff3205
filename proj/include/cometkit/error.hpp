#pragma once

#include <stdexcept>
#include <string>

namespace cometkit {

// Runtime failure inside a module (bad input file, scorer crash, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cometkit
