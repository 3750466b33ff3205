#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cometkit/evalset.hpp"

namespace cometkit {

// True iff `text` is empty after trimming Unicode whitespace.
bool is_empty_hypothesis(std::string_view text);

enum class GuardReason { empty, lang_mismatch };

std::string_view to_string(GuardReason reason);

struct GuardEntry {
  std::size_t index = 0;
  GuardReason reason = GuardReason::empty;
  std::optional<std::string> detected_lang;
  double confidence = 1.0;
};

// A segment the language guard looked at but deliberately left alone.
struct GuardNote {
  std::size_t index = 0;
  std::string detected_lang;
  double margin = 0.0;
};

struct GuardReport {
  std::size_t total = 0;
  std::vector<GuardEntry> per_segment;
  // Segments identified as another language with a margin below threshold.
  std::vector<GuardNote> unreliable;

  std::size_t guarded_count() const { return per_segment.size(); }
};

struct GuardResult {
  ScoreTable scores;
  GuardReport report;
};

// Zeroes segments whose hypothesis is empty; every other score is copied unchanged.
GuardResult apply_empty_guard(const EvalSet& set, const ScoreTable& scores);

// Rank-ordered character n-gram profile (n = 1..4) of one language.
class LanguageProfile {
 public:
  LanguageProfile(std::string lang, std::vector<std::string> ranked_ngrams);

  const std::string& lang() const { return lang_; }
  std::span<const std::string> ranked_ngrams() const { return ranked_; }
  std::size_t size() const { return ranked_.size(); }
  // Rank of `gram`, or nullopt if it is not in the profile.
  std::optional<std::size_t> rank(std::string_view gram) const;

  friend bool operator==(const LanguageProfile& a, const LanguageProfile& b) {
    return a.lang_ == b.lang_ && a.ranked_ == b.ranked_;
  }

 private:
  std::string lang_;
  std::vector<std::string> ranked_;
  std::unordered_map<std::string, std::size_t> ranks_;
};

inline constexpr std::size_t kDefaultProfileSize = 300;

// Top-`k` n-grams over the corpus, by descending count then lexicographic order.
// Throws Error on an empty corpus.
LanguageProfile build_language_profile(std::span<const std::string> corpus_lines, std::string lang,
                                       std::size_t k = kDefaultProfileSize);

// Counts of every n-gram (n = 1..4) of the lower-cased, boundary-padded tokens.
std::unordered_map<std::string, std::size_t> count_ngrams(std::string_view text);

struct LanguageGuess {
  std::string lang;
  double margin = 0.0;   // (second - best) / second, in [0, 1]
  double distance = 0.0; // out-of-place distance of the winner
  bool reliable = false; // false when the text is shorter than min_length
};

inline constexpr std::size_t kDefaultMinLength = 20;
inline constexpr double kDefaultMinMargin = 0.05;

// Out-of-place distance classification. Profiles sharing a language code
// count once; at least two distinct languages are required.
LanguageGuess identify_language(std::string_view text, std::span<const LanguageProfile> profiles,
                                std::size_t min_length = kDefaultMinLength);

struct LangGuardOptions {
  std::string expected_lang;
  std::size_t min_length = kDefaultMinLength;
  double min_margin = kDefaultMinMargin;
};

GuardResult apply_lang_guard(const EvalSet& set, const ScoreTable& scores,
                             std::span<const LanguageProfile> profiles, const LangGuardOptions& options);

// `lang<TAB>K` header then one n-gram per line in rank order.
std::string serialize_profile(const LanguageProfile& profile);
LanguageProfile parse_profile(std::string_view text, std::string_view origin);

// Profiles built from the seed corpora compiled into the library.
std::vector<std::string> bundled_profile_languages();
std::vector<std::string> bundled_seed_corpus(std::string_view lang);
std::vector<LanguageProfile> bundled_profiles(std::size_t k = kDefaultProfileSize);

// TSV with a '#' comment header: index, reason, detected_lang, confidence.
std::string render_guard_report(const GuardReport& report);

}  // namespace cometkit
