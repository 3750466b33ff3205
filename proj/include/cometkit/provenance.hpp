#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "cometkit/error.hpp"

namespace cometkit {

enum class Precision { fp32, fp16, qint8, unk };

Precision parse_precision(std::string_view text);
std::string_view to_string(Precision precision);

inline constexpr std::string_view kUnknown = "unk";

struct SignatureFields {
  std::string interpreter_version{kUnknown};
  std::string framework_version{kUnknown};
  Precision precision = Precision::unk;
  std::string model;

  friend bool operator==(const SignatureFields&, const SignatureFields&) = default;
};

// `Python<interp>|Comet<framework>|<precision>|<model>`. Throws Error if a
// field is empty, contains '|', or contains whitespace.
std::string make_signature(const SignatureFields& fields);
SignatureFields parse_signature(std::string_view signature);

// Commands whose output reveals the scoring environment's versions. An empty
// command leaves the field unprobed.
struct ProbeConfig {
  std::vector<std::string> interpreter_cmd;
  std::vector<std::string> framework_cmd;
  std::chrono::milliseconds timeout{10000};
};

struct DetectedEnvironment {
  std::string interpreter_version{kUnknown};
  std::string framework_version{kUnknown};
  std::vector<std::string> warnings;
};

// Best effort; probe failures degrade to "unk" with a warning, never an exception.
DetectedEnvironment detect_environment(const ProbeConfig& config);

// First dotted version number (e.g. 3.11.8) in `text`, or empty.
std::string extract_version(std::string_view text);

struct CitationRecord {
  std::string key;
  std::vector<std::string> models;
  std::string url;
  std::string bibtex;
};

class UnknownModelError : public Error {
 public:
  UnknownModelError(const std::string& model, std::vector<std::string> suggestions);
  const std::vector<std::string>& suggestions() const { return suggestions_; }

 private:
  std::vector<std::string> suggestions_;
};

class CitationDatabase {
 public:
  // Parses the JSON database; throws Error on malformed entries.
  static CitationDatabase from_json(std::string_view text, std::string_view origin);
  // The database compiled into the library.
  static const CitationDatabase& bundled();

  // Case-insensitive lookup; any `org/` prefix is ignored. Throws
  // UnknownModelError carrying the three nearest names.
  const CitationRecord& cite(std::string_view model) const;
  std::vector<std::string> nearest(std::string_view model, std::size_t count = 3) const;

  const std::vector<CitationRecord>& entries() const { return entries_; }
  int version() const { return version_; }

 private:
  std::vector<CitationRecord> entries_;
  int version_ = 0;
};

// Lower-cased identifier with any organisation prefix removed.
std::string normalize_model_id(std::string_view model);

// Non-overlapping, left-to-right matches of the model-version patterns.
std::vector<std::string> check_reporting(std::string_view document);

}  // namespace cometkit
