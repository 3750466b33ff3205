#include "cometkit/provenance.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "json.hpp"

#include "cometkit/embedded.hpp"
#include "cometkit/process.hpp"

namespace cometkit {

namespace {

constexpr std::string_view kInterpPrefix = "Python";
constexpr std::string_view kFrameworkPrefix = "Comet";

void check_field(std::string_view value, std::string_view name) {
  if (value.empty()) throw Error("signature field '" + std::string(name) + "' is empty");
  for (char c : value) {
    if (c == '|') throw Error("signature field '" + std::string(name) + "' contains '|': " + std::string(value));
    if (static_cast<unsigned char>(c) <= 0x20 || c == 0x7F) {
      throw Error("signature field '" + std::string(name) + "' contains whitespace or control characters");
    }
  }
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string probe(const std::vector<std::string>& cmd, std::chrono::milliseconds timeout, std::string_view what,
                  std::vector<std::string>& warnings) {
  if (cmd.empty()) return std::string(kUnknown);
  try {
    const auto result = run_process(cmd, {}, {}, timeout);
    if (!result.ok()) {
      warnings.push_back(std::string(what) + " probe '" + cmd.front() + "' failed (" + result.describe() + ")");
      return std::string(kUnknown);
    }
    // some interpreters print their version on stderr
    auto version = extract_version(result.out);
    if (version.empty()) version = extract_version(result.err);
    if (version.empty()) {
      warnings.push_back(std::string(what) + " probe '" + cmd.front() + "' printed no version number");
      return std::string(kUnknown);
    }
    return version;
  } catch (const std::exception& e) {
    warnings.push_back(std::string(what) + " probe failed: " + e.what());
    return std::string(kUnknown);
  }
}

}  // namespace

Precision parse_precision(std::string_view text) {
  if (text == "fp32") return Precision::fp32;
  if (text == "fp16") return Precision::fp16;
  if (text == "qint8") return Precision::qint8;
  if (text == "unk") return Precision::unk;
  throw ConfigError("unknown precision '" + std::string(text) + "' (expected fp32, fp16, qint8 or unk)");
}

std::string_view to_string(Precision precision) {
  switch (precision) {
    case Precision::fp32:
      return "fp32";
    case Precision::fp16:
      return "fp16";
    case Precision::qint8:
      return "qint8";
    case Precision::unk:
      break;
  }
  return "unk";
}

std::string make_signature(const SignatureFields& fields) {
  check_field(fields.interpreter_version, "interpreter version");
  check_field(fields.framework_version, "framework version");
  check_field(fields.model, "model");
  std::string sig;
  sig += kInterpPrefix;
  sig += fields.interpreter_version;
  sig += '|';
  sig += kFrameworkPrefix;
  sig += fields.framework_version;
  sig += '|';
  sig += to_string(fields.precision);
  sig += '|';
  sig += fields.model;
  return sig;
}

SignatureFields parse_signature(std::string_view signature) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto bar = signature.find('|', start);
    parts.push_back(signature.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (parts.size() != 4) throw Error("signature must have four '|'-separated fields: " + std::string(signature));
  if (!parts[0].starts_with(kInterpPrefix) || !parts[1].starts_with(kFrameworkPrefix)) {
    throw Error("signature fields must start with 'Python' and 'Comet': " + std::string(signature));
  }
  SignatureFields fields;
  fields.interpreter_version = std::string(parts[0].substr(kInterpPrefix.size()));
  fields.framework_version = std::string(parts[1].substr(kFrameworkPrefix.size()));
  fields.precision = parse_precision(parts[2]);
  fields.model = std::string(parts[3]);
  make_signature(fields);  // validates the remaining fields
  return fields;
}

std::string extract_version(std::string_view text) {
  static const std::regex kVersion(R"(\d+(\.\d+)+)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(text.begin(), text.end(), m, kVersion)) return m.str();
  return {};
}

DetectedEnvironment detect_environment(const ProbeConfig& config) {
  DetectedEnvironment env;
  env.interpreter_version = probe(config.interpreter_cmd, config.timeout, "interpreter", env.warnings);
  env.framework_version = probe(config.framework_cmd, config.timeout, "framework", env.warnings);
  return env;
}

UnknownModelError::UnknownModelError(const std::string& model, std::vector<std::string> suggestions)
    : Error([&] {
        std::string msg = "no citation for model '" + model + "'; nearest known models:";
        for (const auto& s : suggestions) msg += " " + s;
        return msg;
      }()),
      suggestions_(std::move(suggestions)) {}

std::string normalize_model_id(std::string_view model) {
  while (!model.empty() && std::isspace(static_cast<unsigned char>(model.front()))) model.remove_prefix(1);
  while (!model.empty() && std::isspace(static_cast<unsigned char>(model.back()))) model.remove_suffix(1);
  if (const auto slash = model.rfind('/'); slash != std::string_view::npos) model.remove_prefix(slash + 1);
  return lower_ascii(model);
}

CitationDatabase CitationDatabase::from_json(std::string_view text, std::string_view origin) {
  const std::string where(origin);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  CitationDatabase db;
  try {
    db.version_ = doc.at("version").get<int>();
    std::map<std::string, std::string> owner;
    for (const auto& item : doc.at("entries")) {
      CitationRecord rec;
      rec.key = normalize_model_id(item.at("key").get<std::string>());
      for (const auto& m : item.at("models")) rec.models.push_back(normalize_model_id(m.get<std::string>()));
      rec.url = item.at("url").get<std::string>();
      rec.bibtex = item.at("bibtex").get<std::string>();
      if (rec.url.empty()) throw Error(where + ": entry '" + rec.key + "' has an empty url");
      if (!rec.bibtex.starts_with("@")) throw Error(where + ": bibtex of entry '" + rec.key + "' must start with '@'");
      std::vector<std::string> names{rec.key};
      names.insert(names.end(), rec.models.begin(), rec.models.end());
      for (const auto& n : names) {
        if (const auto [it, fresh] = owner.emplace(n, rec.key); !fresh && it->second != rec.key) {
          throw Error(where + ": model '" + n + "' listed under both '" + it->second + "' and '" + rec.key + "'");
        }
      }
      db.entries_.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  return db;
}

const CitationDatabase& CitationDatabase::bundled() {
  static const CitationDatabase db = [] {
    const auto data = embedded::find("citations.json");
    if (!data) throw Error("citation database missing from build");
    return from_json(*data, "citations.json");
  }();
  return db;
}

const CitationRecord& CitationDatabase::cite(std::string_view model) const {
  const auto id = normalize_model_id(model);
  for (const auto& rec : entries_) {
    if (rec.key == id || std::find(rec.models.begin(), rec.models.end(), id) != rec.models.end()) return rec;
  }
  throw UnknownModelError(std::string(model), nearest(model));
}

std::vector<std::string> CitationDatabase::nearest(std::string_view model, std::size_t count) const {
  const auto id = normalize_model_id(model);
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& rec : entries_) {
    scored.emplace_back(edit_distance(id, rec.key), rec.key);
    for (const auto& m : rec.models) scored.emplace_back(edit_distance(id, m), m);
  }
  std::sort(scored.begin(), scored.end());
  scored.erase(std::unique(scored.begin(), scored.end()), scored.end());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < std::min(count, scored.size()); ++i) names.push_back(scored[i].second);
  return names;
}

std::vector<std::string> check_reporting(std::string_view document) {
  static const std::regex kPatterns(R"(xcomet-|wmt(20|21|22|23)-comet|wmt-da-estimator|comet[ -](da|20|21|22|23))",
                                    std::regex::ECMAScript | std::regex::icase);
  std::vector<std::string> matches;
  using It = std::string_view::const_iterator;
  for (std::regex_iterator<It> it(document.begin(), document.end(), kPatterns), end; it != end; ++it) {
    matches.push_back(it->str());
  }
  return matches;
}

}  // namespace cometkit
