#include "cometkit/guards.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "cometkit/embedded.hpp"
#include "cometkit/error.hpp"
#include "cometkit/utf8.hpp"

namespace cometkit {

namespace {

constexpr char32_t kBoundary = U'_';
constexpr std::size_t kMaxOrder = 4;

bool is_separator(char32_t cp) {
  if (utf8::is_space(cp)) return true;
  if (cp < 0x80) return !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'));
  return (cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x206F) ||
         (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF01 && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65) || cp == utf8::kReplacement;
}

void add_token_ngrams(std::u32string_view token, std::unordered_map<std::string, std::size_t>& counts) {
  std::u32string padded;
  padded.reserve(token.size() + 2);
  padded.push_back(kBoundary);
  padded.append(token);
  padded.push_back(kBoundary);
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    if (padded.size() < n) break;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      if (n == 1 && padded[i] == kBoundary) continue;
      ++counts[utf8::encode(std::u32string_view(padded).substr(i, n))];
    }
  }
}

std::vector<std::string> top_ngrams(const std::unordered_map<std::string, std::size_t>& counts, std::size_t k) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (items.size() > k) items.resize(k);
  std::vector<std::string> ranked;
  ranked.reserve(items.size());
  for (auto& item : items) ranked.push_back(std::move(item.first));
  return ranked;
}

std::size_t codepoint_length(std::string_view text) { return utf8::trim(utf8::decode(text)).size(); }

}  // namespace

bool is_empty_hypothesis(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto cp = utf8::next(text, pos);
    if (!cp || !utf8::is_space(*cp)) return false;
  }
  return true;
}

std::string_view to_string(GuardReason reason) {
  return reason == GuardReason::empty ? "empty" : "lang_mismatch";
}

GuardResult apply_empty_guard(const EvalSet& set, const ScoreTable& scores) {
  check_aligned(set, scores);
  std::vector<double> values(scores.scores().begin(), scores.scores().end());
  std::vector<GuardFlag> flags(scores.flags().begin(), scores.flags().end());
  GuardReport report;
  report.total = set.size();
  for (const Segment& seg : set.segments()) {
    if (!is_empty_hypothesis(seg.hypothesis)) continue;
    values[seg.index] = 0.0;
    flags[seg.index] = GuardFlag::empty;
    report.per_segment.push_back({seg.index, GuardReason::empty, std::nullopt, 1.0});
  }
  return {ScoreTable(scores.system_name(), std::move(values), std::move(flags)), std::move(report)};
}

LanguageProfile::LanguageProfile(std::string lang, std::vector<std::string> ranked_ngrams)
    : lang_(std::move(lang)), ranked_(std::move(ranked_ngrams)) {
  if (lang_.empty()) throw Error("language profile: empty language code");
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    if (!ranks_.emplace(ranked_[i], i).second) {
      throw Error("language profile '" + lang_ + "': duplicate n-gram '" + ranked_[i] + "'");
    }
  }
}

std::optional<std::size_t> LanguageProfile::rank(std::string_view gram) const {
  const auto it = ranks_.find(std::string(gram));
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::unordered_map<std::string, std::size_t> count_ngrams(std::string_view text) {
  std::unordered_map<std::string, std::size_t> counts;
  std::u32string token;
  for (char32_t cp : utf8::decode(text)) {
    if (is_separator(cp)) {
      if (!token.empty()) add_token_ngrams(token, counts);
      token.clear();
    } else {
      token.push_back(utf8::to_lower(cp));
    }
  }
  if (!token.empty()) add_token_ngrams(token, counts);
  return counts;
}

LanguageProfile build_language_profile(std::span<const std::string> corpus_lines, std::string lang, std::size_t k) {
  if (corpus_lines.empty()) throw Error("cannot build a language profile for '" + lang + "' from an empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& line : corpus_lines) {
    for (const auto& [gram, n] : count_ngrams(line)) counts[gram] += n;
  }
  return LanguageProfile(std::move(lang), top_ngrams(counts, k));
}

LanguageGuess identify_language(std::string_view text, std::span<const LanguageProfile> profiles,
                                std::size_t min_length) {
  std::map<std::string, const LanguageProfile*> by_lang;
  std::size_t k = 0;
  for (const auto& p : profiles) {
    by_lang.emplace(p.lang(), &p);
    k = std::max(k, p.size());
  }
  if (by_lang.size() < 2) throw Error("language identification needs profiles for at least two languages");

  const auto doc = top_ngrams(count_ngrams(text), k);
  // std::map iteration is lexicographic, so equal distances resolve to the smaller code.
  std::vector<std::pair<double, std::string>> distances;
  for (const auto& [lang, profile] : by_lang) {
    double d = 0.0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto r = profile->rank(doc[i]);
      d += r ? static_cast<double>(*r > i ? *r - i : i - *r) : static_cast<double>(profile->size());
    }
    distances.emplace_back(d, lang);
  }
  std::stable_sort(distances.begin(), distances.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  LanguageGuess guess;
  guess.lang = distances[0].second;
  guess.distance = distances[0].first;
  const double second = distances[1].first;
  guess.margin = second > 0.0 ? (second - distances[0].first) / second : 0.0;
  guess.reliable = codepoint_length(text) >= min_length;
  return guess;
}

GuardResult apply_lang_guard(const EvalSet& set, const ScoreTable& scores,
                             std::span<const LanguageProfile> profiles, const LangGuardOptions& options) {
  check_aligned(set, scores);
  const bool known = std::any_of(profiles.begin(), profiles.end(),
                                 [&](const auto& p) { return p.lang() == options.expected_lang; });
  if (!known) throw Error("no language profile for expected language '" + options.expected_lang + "'");

  std::vector<double> values(scores.scores().begin(), scores.scores().end());
  std::vector<GuardFlag> flags(scores.flags().begin(), scores.flags().end());
  GuardReport report;
  report.total = set.size();
  for (const Segment& seg : set.segments()) {
    if (is_empty_hypothesis(seg.hypothesis)) continue;
    const auto guess = identify_language(seg.hypothesis, profiles, options.min_length);
    if (!guess.reliable || guess.lang == options.expected_lang) continue;
    if (guess.margin < options.min_margin) {
      report.unreliable.push_back({seg.index, guess.lang, guess.margin});
      continue;
    }
    values[seg.index] = 0.0;
    flags[seg.index] = GuardFlag::lang;
    report.per_segment.push_back({seg.index, GuardReason::lang_mismatch, guess.lang, guess.margin});
  }
  return {ScoreTable(scores.system_name(), std::move(values), std::move(flags)), std::move(report)};
}

std::string serialize_profile(const LanguageProfile& profile) {
  std::string out = profile.lang() + "\t" + std::to_string(profile.size()) + "\n";
  for (const auto& gram : profile.ranked_ngrams()) {
    out += gram;
    out += '\n';
  }
  return out;
}

LanguageProfile parse_profile(std::string_view text, std::string_view origin) {
  const auto lines = split_lines(text, origin);
  if (lines.empty()) throw Error(std::string(origin) + ": empty profile");
  const auto& header = lines.front();
  const auto tab = header.find('\t');
  if (tab == std::string::npos) throw Error(std::string(origin) + ": header must be 'lang<TAB>K'");
  std::size_t k = 0;
  const auto* kb = header.data() + tab + 1;
  const auto* ke = header.data() + header.size();
  const auto res = std::from_chars(kb, ke, k);
  if (res.ec != std::errc() || res.ptr != ke) throw Error(std::string(origin) + ": bad K in header");
  // n-grams never contain '#', so trailing comment lines are unambiguous
  auto end = lines.end();
  while (end != lines.begin() + 1 && ((end - 1)->empty() || (end - 1)->front() == '#')) --end;
  const auto found = static_cast<std::size_t>(end - lines.begin() - 1);
  if (found != k) {
    throw Error(std::string(origin) + ": header declares " + std::to_string(k) + " n-grams, found " +
                std::to_string(found));
  }
  return LanguageProfile(header.substr(0, tab), std::vector<std::string>(lines.begin() + 1, end));
}

std::vector<std::string> bundled_profile_languages() {
  std::vector<std::string> langs;
  constexpr std::string_view prefix = "langid/";
  for (const auto& r : embedded::resources()) {
    if (r.name.starts_with(prefix) && r.name.ends_with(".txt")) {
      langs.emplace_back(r.name.substr(prefix.size(), r.name.size() - prefix.size() - 4));
    }
  }
  std::sort(langs.begin(), langs.end());
  return langs;
}

std::vector<std::string> bundled_seed_corpus(std::string_view lang) {
  const std::string name = "langid/" + std::string(lang) + ".txt";
  const auto data = embedded::find(name);
  if (!data) throw Error("no bundled seed corpus for language '" + std::string(lang) + "'");
  auto lines = split_lines(*data, name);
  std::erase_if(lines, [](const std::string& l) { return l.empty(); });
  return lines;
}

std::vector<LanguageProfile> bundled_profiles(std::size_t k) {
  std::vector<LanguageProfile> profiles;
  for (const auto& lang : bundled_profile_languages()) {
    profiles.push_back(build_language_profile(bundled_seed_corpus(lang), lang, k));
  }
  return profiles;
}

std::string render_guard_report(const GuardReport& report) {
  std::string out = "# guard report\n";
  out += "# guarded_count\t" + std::to_string(report.guarded_count()) + "\n";
  out += "# total\t" + std::to_string(report.total) + "\n";
  out += "# index\treason\tdetected_lang\tconfidence\n";
  for (const auto& e : report.per_segment) {
    out += std::to_string(e.index) + "\t" + std::string(to_string(e.reason)) + "\t" +
           e.detected_lang.value_or("-") + "\t" + format_score(e.confidence) + "\n";
  }
  for (const auto& n : report.unreliable) {
    out += "# unreliable\t" + std::to_string(n.index) + "\t" + n.detected_lang + "\t" + format_score(n.margin) + "\n";
  }
  return out;
}

}  // namespace cometkit
