#include "cometkit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cometkit/biaslab.hpp"
#include "cometkit/error.hpp"
#include "cometkit/evalset.hpp"
#include "cometkit/metastats.hpp"
#include "cometkit/process.hpp"

namespace cometkit::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kQint8Warning =
    "warning: qint8 scores depend on the device (CPU vs GPU); the signature does not record it";

std::vector<LanguageProfile> load_profiles(const std::string& dir) {
  if (dir.empty()) return bundled_profiles();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".profile") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LanguageProfile> profiles;
  for (const auto& f : files) profiles.push_back(parse_profile(read_file(f), f.string()));
  return profiles;
}

GuardReport merge_reports(GuardReport a, const GuardReport& b) {
  a.per_segment.insert(a.per_segment.end(), b.per_segment.begin(), b.per_segment.end());
  a.unreliable.insert(a.unreliable.end(), b.unreliable.begin(), b.unreliable.end());
  std::sort(a.per_segment.begin(), a.per_segment.end(), [](const auto& x, const auto& y) { return x.index < y.index; });
  return a;
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file(path, content);
  }
}

std::string kv(std::string_view key, std::string_view value) {
  return "# " + std::string(key) + "\t" + std::string(value) + "\n";
}

void add_signature_options(CLI::App& cmd, std::string& model, std::string& precision, std::string& interp,
                           std::string& framework) {
  cmd.add_option("--model", model, "Model identifier recorded in the signature");
  cmd.add_option("--prec", precision, "Numeric precision: fp32, fp16, qint8 or unk")->capture_default_str();
  cmd.add_option("--interp", interp, "Interpreter version of the scoring environment")->capture_default_str();
  cmd.add_option("--framework", framework, "Scoring framework version")->capture_default_str();
}

std::vector<double> scores_of(const fs::path& path) {
  const auto table = read_score_table(path, path.stem().string());
  return {table.scores().begin(), table.scores().end()};
}

// ---- meta -------------------------------------------------------------------

struct MetaConfig {
  std::string pred_path;
  std::string gold_path;
  std::string metric_ranking;
  std::string human_ranking;
  std::string empty_scores;
  std::size_t histogram_bins = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::string histogram_out;
  std::string out_path;
  std::string model{kUnknown};
  std::string precision = "unk";
  std::string interp{kUnknown};
  std::string framework{kUnknown};

  void validate() const {
    if (metric_ranking.empty() != human_ranking.empty()) {
      throw ConfigError("--metric-ranking and --human-ranking must be given together");
    }
    if (histogram_bins > 0 && !(lo < hi)) throw ConfigError("histogram needs --lo < --hi");
    if (!histogram_out.empty() && histogram_bins == 0) throw ConfigError("--histogram-out needs --histogram-bins");
    parse_precision(precision);
  }
};

int run_meta(const MetaConfig& cfg, const std::string& cmdline, std::ostream& out) {
  cfg.validate();
  const SignatureFields sig{cfg.interp, cfg.framework, parse_precision(cfg.precision), cfg.model};
  const std::string signature = make_signature(sig);

  const auto pred = scores_of(cfg.pred_path);
  const auto gold = scores_of(cfg.gold_path);
  std::optional<SystemRanking> metric, human;
  if (!cfg.metric_ranking.empty()) {
    metric = read_ranking(cfg.metric_ranking);
    human = read_ranking(cfg.human_ranking);
  }
  const auto report = meta_evaluate(pred, gold, metric ? &*metric : nullptr, human ? &*human : nullptr);
  const auto runs = compare_runs(pred, gold);

  std::string text = render_meta_report(report);
  std::string tsv = render_meta_report_tsv(report);
  auto add = [&](std::string_view key, const std::string& value) {
    text += std::string(key) + std::string(14 - key.size(), ' ') + value + "\n";
    tsv += std::string(key) + "\t" + value + "\n";
  };
  add("max_abs_diff", format_score(runs.max_abs_diff));
  if (!cfg.empty_scores.empty()) add("worse_empty", worse_than_empty(pred, scores_of(cfg.empty_scores)).str());

  std::string hist;
  if (cfg.histogram_bins > 0) {
    hist = "bin_center\tcount\n";
    for (const auto& bin : histogram(pred, cfg.histogram_bins, cfg.lo, cfg.hi)) {
      hist += format_score(bin.center) + "\t" + std::to_string(bin.count) + "\n";
    }
  }

  const std::string tail = trailer(signature, cmdline);
  if (!cfg.out_path.empty()) write_file(cfg.out_path, tsv + tail);
  if (!cfg.histogram_out.empty()) {
    write_file(cfg.histogram_out, hist + tail);
  }
  out << text;
  if (!hist.empty() && cfg.histogram_out.empty()) out << hist;
  return kOk;
}

// ---- provenance ---------------------------------------------------------------

struct SignatureConfig {
  std::string model;
  std::string precision = "unk";
  std::optional<std::string> interp;
  std::optional<std::string> framework;
  bool detect = false;
  std::string probe_interp;
  std::string probe_framework;
};

int run_signature(const SignatureConfig& cfg, std::ostream& out, std::ostream& err) {
  SignatureFields fields;
  fields.model = cfg.model;
  fields.precision = parse_precision(cfg.precision);

  ProbeConfig probes;
  if (cfg.detect) {
    probes.interpreter_cmd = {"python3", "--version"};
    probes.framework_cmd = {"python3", "-c", "import comet; print(comet.__version__)"};
  }
  if (!cfg.probe_interp.empty()) probes.interpreter_cmd = split_command(cfg.probe_interp);
  if (!cfg.probe_framework.empty()) probes.framework_cmd = split_command(cfg.probe_framework);
  if (!cfg.interp) {
    // only probe what the user did not pin
  } else {
    probes.interpreter_cmd.clear();
  }
  if (cfg.framework) probes.framework_cmd.clear();
  const auto detected = detect_environment(probes);
  for (const auto& w : detected.warnings) err << "warning: " << w << "\n";
  fields.interpreter_version = cfg.interp.value_or(detected.interpreter_version);
  fields.framework_version = cfg.framework.value_or(detected.framework_version);

  try {
    out << make_signature(fields) << "\n";
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (fields.precision == Precision::qint8) err << kQint8Warning << "\n";
  return kOk;
}

int run_cite(const std::string& model, const std::string& db_path, std::ostream& out) {
  std::optional<CitationDatabase> custom;
  if (!db_path.empty()) custom = CitationDatabase::from_json(read_file(db_path), db_path);
  const auto& db = custom ? *custom : CitationDatabase::bundled();
  const auto& rec = db.cite(model);
  out << rec.url << "\n" << rec.bibtex << "\n";
  return kOk;
}

int run_check_reporting(const std::string& path, std::ostream& out) {
  const auto matches = check_reporting(read_file(path));
  for (const auto& m : matches) out << m << "\n";
  return matches.empty() ? kNoMatch : kOk;
}

// ---- biaslab ------------------------------------------------------------------

struct BiasConfig {
  std::size_t seeds = 5;
  std::uint64_t seed = 1;
  std::size_t epochs = 0;
  std::size_t train_size = 0;
  double learning_rate = 0.0;
  std::string out_path;

  biaslab::Config lab() const {
    biaslab::Config c;
    if (epochs > 0) c.epochs = epochs;
    if (train_size > 0) c.train_per_direction = train_size;
    if (learning_rate > 0.0) c.learning_rate = learning_rate;
    return c;
  }
};

std::string biaslab_signature() {
  return make_signature({std::string(kUnknown), std::string(kUnknown), Precision::fp32, "toy-hashed-linear"});
}

int run_biaslab_dist(const BiasConfig& cfg, const std::string& cmdline, std::ostream& out) {
  if (cfg.seeds == 0) throw ConfigError("--seeds must be at least 1");
  const auto lab = cfg.lab();
  std::vector<biaslab::DistributionReport> reports;
  std::string tsv;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    reports.push_back(biaslab::distribution_bias_experiment(cfg.seed + s, lab));
    tsv += "# seed\t" + std::to_string(cfg.seed + s) + "\n" + biaslab::render_distribution_tsv(reports.back());
  }
  biaslab::DistributionReport mean = reports.front();
  for (std::size_t r = 0; r < mean.rows.size(); ++r) {
    for (std::size_t c = 0; c < mean.columns.size(); ++c) {
      double sum = 0.0;
      for (const auto& rep : reports) sum += rep.mean_scores[r][c];
      mean.mean_scores[r][c] = sum / static_cast<double>(reports.size());
    }
  }
  tsv += "# mean over seeds\n" + biaslab::render_distribution_tsv(mean);

  const auto p = biaslab::check_distribution_pattern(reports);
  std::ostringstream summary;
  const auto a = lab.dir_a.direction.str();
  const auto b = lab.dir_b.direction.str();
  summary << "top-" << lab.filter_fraction * 100 << "% of " << a << " raises " << a << ": " << p.top_raises_a << "/"
          << p.seeds << " seeds\n"
          << "bottom-" << lab.filter_fraction * 100 << "% of " << a << " lowers " << a << ": " << p.bottom_lowers_a
          << "/" << p.seeds << " seeds\n"
          << "mean |shift| top filter: " << a << " " << format_score(p.mean_shift_a_top) << ", " << b << " "
          << format_score(p.mean_shift_b_top) << "\n"
          << "mean |shift| bottom filter: " << a << " " << format_score(p.mean_shift_a_bottom) << ", " << b << " "
          << format_score(p.mean_shift_b_bottom) << "\n"
          << "distribution-bias pattern: " << (p.holds() ? "HOLDS" : "DOES NOT HOLD") << "\n";

  std::string doc = tsv;
  std::istringstream lines(summary.str());
  for (std::string line; std::getline(lines, line);) doc += "# " + line + "\n";
  doc += trailer(biaslab_signature(), cmdline);
  if (!cfg.out_path.empty()) write_file(cfg.out_path, doc);
  out << biaslab::render_distribution_tsv(mean) << summary.str();
  return kOk;
}

int run_biaslab_tags(const BiasConfig& cfg, const std::string& cmdline, std::ostream& out) {
  if (cfg.seeds == 0) throw ConfigError("--seeds must be at least 1");
  const auto lab = cfg.lab();
  std::vector<biaslab::TagReport> reports;
  std::string tsv;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    reports.push_back(biaslab::tag_bias_experiment(cfg.seed + s, lab));
    tsv += "# seed\t" + std::to_string(cfg.seed + s) + "\n" + biaslab::render_tag_tsv(reports.back());
  }
  biaslab::TagReport mean = reports.front();
  for (std::size_t i = 0; i < mean.tags.size(); ++i) {
    double pred = 0.0, train_sum = 0.0;
    for (const auto& rep : reports) {
      pred += rep.mean_prediction[i];
      if (rep.train_mean[i]) train_sum += *rep.train_mean[i];
    }
    mean.mean_prediction[i] = pred / static_cast<double>(reports.size());
    if (mean.train_mean[i]) mean.train_mean[i] = train_sum / static_cast<double>(reports.size());
  }
  tsv += "# mean over seeds\n" + biaslab::render_tag_tsv(mean);

  const auto p = biaslab::check_tag_pattern(reports, lab);
  std::ostringstream summary;
  summary << "seen tags non-decreasing: " << p.monotone_seen << "/" << p.seeds << " seeds\n"
          << "best later unseen tag " << p.best_unseen_tag << ": " << format_score(p.best_unseen_after)
          << " vs first seen tag: " << format_score(p.mean_2019) << "\n"
          << "mean spread across test tags: " << format_score(p.max_tag_spread) << "\n"
          << "tag-bias pattern: " << (p.holds() ? "HOLDS" : "DOES NOT HOLD") << "\n";

  std::string doc = tsv;
  std::istringstream lines(summary.str());
  for (std::string line; std::getline(lines, line);) doc += "# " + line + "\n";
  doc += trailer(biaslab_signature(), cmdline);
  if (!cfg.out_path.empty()) write_file(cfg.out_path, doc);
  out << biaslab::render_tag_tsv(mean) << summary.str();
  return kOk;
}

// ---- profiles -----------------------------------------------------------------

int run_profiles_build(const std::string& lang, const std::string& corpus, std::size_t k, const std::string& out_path,
                       const std::string& cmdline, std::ostream& out) {
  if (k == 0) throw ConfigError("--k must be at least 1");
  auto lines = corpus.empty() ? bundled_seed_corpus(lang) : read_lines(corpus);
  std::erase_if(lines, [](const std::string& l) { return l.empty(); });
  const auto profile = build_language_profile(lines, lang, k);
  const auto sig = make_signature({std::string(kUnknown), std::string(kUnknown), Precision::unk, "langid-ngram"});
  emit(out_path, serialize_profile(profile) + trailer(sig, cmdline), out);
  return kOk;
}

}  // namespace

void RunConfig::validate() const {
  Direction::parse(lang_pair);
  if (backend == "precomputed") {
    if (scores_path.empty()) throw ConfigError("--backend precomputed needs --scores");
  } else if (backend == "external") {
    if (command.empty()) throw ConfigError("--backend external needs --cmd");
    split_command(command);
  } else if (backend != "surrogate") {
    throw ConfigError("unknown backend '" + backend + "' (expected surrogate, precomputed or external)");
  }
  if (backend != "external" && (shard_size != 0)) throw ConfigError("--shard-size applies to the external backend only");
  if (jobs == 0) throw ConfigError("--jobs must be at least 1");
  for (const auto& e : env) {
    if (e.find('=') == std::string::npos || e.front() == '=') throw ConfigError("--env expects KEY=VALUE, got '" + e + "'");
  }
  cometkit::validate(SurrogateWeights{w_ref, w_src});
  if (multiref) {
    const auto strategy = parse_multiref_strategy(*multiref);
    if (strategy == MultiRefStrategy::agg && ref_paths.size() != 2) {
      throw ConfigError("agg requires exactly two references (--ref given " + std::to_string(ref_paths.size()) + " times)");
    }
    if (ref_paths.empty()) throw ConfigError("--multiref needs at least one --ref");
    if (backend == "precomputed") throw ConfigError("--multiref needs a live backend, not precomputed scores");
  } else if (ref_paths.size() > 1) {
    throw ConfigError("several --ref files given; choose a strategy with --multiref {max,avg,agg}");
  }
  if (guard_lang && !profiles_dir.empty() && !fs::is_directory(profiles_dir)) {
    throw ConfigError("--profiles must be a directory of .profile files");
  }
  if (!(min_margin >= 0.0 && min_margin <= 1.0)) throw ConfigError("--min-margin must lie in [0, 1]");
  parse_precision(precision);
  try {
    make_signature(signature_fields());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

Backend RunConfig::make_backend() const {
  if (backend == "precomputed") return PrecomputedBackend{read_score_map(scores_path), scores_path};
  if (backend == "external") {
    ExternalBackend ext;
    ext.argv = split_command(command);
    for (const auto& e : env) {
      const auto eq = e.find('=');
      ext.env.emplace_back(e.substr(0, eq), e.substr(eq + 1));
    }
    ext.shard_size = shard_size;
    ext.jobs = jobs;
    return ext;
  }
  return SurrogateBackend{SurrogateWeights{w_ref, w_src}, jobs};
}

SignatureFields RunConfig::signature_fields() const {
  SignatureFields f;
  f.interpreter_version = interp;
  f.framework_version = framework;
  f.precision = parse_precision(precision);
  f.model = !model.empty() ? model : backend == "surrogate" ? "surrogate-chrf" : std::string(kUnknown);
  return f;
}

std::string trailer(const std::string& signature, const std::string& cmdline) {
  return kv("signature", signature) + kv("command", cmdline);
}

std::string command_line(int argc, const char* const* argv) {
  std::string line;
  for (int i = 0; i < argc; ++i) {
    if (i) line += ' ';
    line += shell_quote(argv[i]);
  }
  return line;
}

int run_score(const RunConfig& config, const std::string& cmdline, std::ostream& out, std::ostream& err) {
  config.validate();
  const auto direction = Direction::parse(config.lang_pair);
  const auto signature = make_signature(config.signature_fields());
  const auto backend = config.make_backend();
  std::vector<LanguageProfile> profiles;
  if (config.guard_lang) {
    profiles = load_profiles(config.profiles_dir);
    const bool known = std::any_of(profiles.begin(), profiles.end(),
                                   [&](const auto& p) { return p.lang() == direction.tgt_lang; });
    if (!known) throw ConfigError("no language profile for target language '" + direction.tgt_lang + "'");
  }

  std::vector<fs::path> refs(config.ref_paths.begin(), config.ref_paths.end());
  const std::string name = config.system_name.empty() ? fs::path(config.hyp_path).stem().string() : config.system_name;
  const auto set = load_evalset(config.src_path, config.hyp_path, refs, direction, name);

  ScoreTable table;
  if (config.multiref) {
    table = evaluate_system_multiref(parse_multiref_strategy(*config.multiref), set, backend);
  } else {
    const auto requests = make_requests(set);
    table = ScoreTable(set.system_name(), score_batch(backend, requests));
  }

  GuardReport report;
  report.total = set.size();
  if (config.guard_empty) {
    auto guarded = apply_empty_guard(set, table);
    table = std::move(guarded.scores);
    report = merge_reports(std::move(report), guarded.report);
  }
  if (config.guard_lang) {
    auto guarded = apply_lang_guard(set, table, profiles, {direction.tgt_lang, config.min_len, config.min_margin});
    table = std::move(guarded.scores);
    report = merge_reports(std::move(report), guarded.report);
  }
  const double sys = system_score(table);

  std::string doc = render_score_tsv(table);
  doc += kv("system", set.system_name());
  doc += kv("direction", direction.str());
  if (config.multiref) doc += kv("multiref", *config.multiref);
  doc += kv("system_score", format_score(sys));
  doc += kv("guarded_count", std::to_string(report.guarded_count()));
  doc += trailer(signature, cmdline);

  std::string guard_doc;
  if (!config.guard_report_path.empty()) guard_doc = render_guard_report(report) + trailer(signature, cmdline);

  emit(config.out_path, doc, out);
  if (!guard_doc.empty()) write_file(config.guard_report_path, guard_doc);
  if (!config.out_path.empty()) {
    out << "system_score\t" << format_score(sys) << "\n";
    out << "guarded_count\t" << report.guarded_count() << "\n";
  }
  if (config.signature_fields().precision == Precision::qint8) err << kQint8Warning << "\n";
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::string cmdline = command_line(argc, argv);
  CLI::App app{"Reproducible, guarded evaluation harness for COMET-style MT metrics"};
  app.require_subcommand(1);
  app.fallthrough(false);

  RunConfig score_cfg;
  RunConfig multiref_cfg;
  auto add_score_options = [&](CLI::App& cmd, RunConfig& cfg, bool multiref_required) {
    cmd.add_option("--src", cfg.src_path, "Source file, one segment per line")->required()->check(CLI::ExistingFile);
    cmd.add_option("--hyp", cfg.hyp_path, "Hypothesis file")->required()->check(CLI::ExistingFile);
    cmd.add_option("--ref", cfg.ref_paths, "Reference file (repeat for several; omit for QE)")
        ->check(CLI::ExistingFile)
        ->take_all()
        ->allow_extra_args(false);
    cmd.add_option("--lang-pair", cfg.lang_pair, "Translation direction, e.g. en-de")->required();
    cmd.add_option("--system", cfg.system_name, "System name (default: hypothesis file stem)");
    cmd.add_option("--backend", cfg.backend, "surrogate, precomputed or external")->capture_default_str();
    cmd.add_option("--scores", cfg.scores_path, "index<TAB>score table for the precomputed backend")
        ->check(CLI::ExistingFile);
    cmd.add_option("--cmd", cfg.command, "External scorer command line");
    cmd.add_option("--env", cfg.env, "KEY=VALUE passed to the external scorer (repeatable)");
    cmd.add_option("--shard-size", cfg.shard_size, "Requests per external process (0 = one process)");
    cmd.add_option("--jobs", cfg.jobs, "Concurrent scorer shards")->capture_default_str();
    cmd.add_option("--w-ref", cfg.w_ref, "Surrogate weight of hypothesis-reference similarity")->capture_default_str();
    cmd.add_option("--w-src", cfg.w_src, "Surrogate weight of hypothesis-source similarity")->capture_default_str();
    cmd.add_flag("--guard-empty", cfg.guard_empty, "Force empty hypotheses to score 0");
    cmd.add_flag("--guard-lang", cfg.guard_lang, "Force hypotheses in the wrong language to score 0");
    cmd.add_option("--profiles", cfg.profiles_dir, "Directory of .profile files (default: bundled profiles)");
    cmd.add_option("--min-len", cfg.min_len, "Shortest hypothesis (characters) the language guard judges")
        ->capture_default_str();
    cmd.add_option("--min-margin", cfg.min_margin, "Smallest identification margin the language guard acts on")
        ->capture_default_str();
    auto* mr = cmd.add_option("--multiref", cfg.multiref, "Multi-reference strategy: max, avg or agg");
    if (multiref_required) mr->required();
    cmd.add_option("--out", cfg.out_path, "Segment score TSV (default: stdout)");
    cmd.add_option("--guard-report", cfg.guard_report_path, "Guard report TSV");
    add_signature_options(cmd, cfg.model, cfg.precision, cfg.interp, cfg.framework);
  };
  auto* score = app.add_subcommand("score", "Score a system, apply guards, aggregate");
  add_score_options(*score, score_cfg, false);
  auto* multiref = app.add_subcommand("multiref", "Score a system against several references");
  add_score_options(*multiref, multiref_cfg, true);

  MetaConfig meta_cfg;
  auto* meta = app.add_subcommand("meta",
                                  "Meta-evaluation of two score files (MAE, Kendall tau, pairwise accuracy). "
                                  "MAE is reported in the units of the inputs; rescale to 0-100 upstream if needed.");
  meta->add_option("pred", meta_cfg.pred_path, "Metric scores TSV")->required()->check(CLI::ExistingFile);
  meta->add_option("gold", meta_cfg.gold_path, "Reference scores TSV (human, or a second run)")
      ->required()
      ->check(CLI::ExistingFile);
  meta->add_option("--metric-ranking", meta_cfg.metric_ranking, "system<TAB>score by the metric")
      ->check(CLI::ExistingFile);
  meta->add_option("--human-ranking", meta_cfg.human_ranking, "system<TAB>score by humans")->check(CLI::ExistingFile);
  meta->add_option("--empty-scores", meta_cfg.empty_scores, "Scores of empty hypotheses on the same sources")
      ->check(CLI::ExistingFile);
  meta->add_option("--histogram-bins", meta_cfg.histogram_bins, "Histogram of the metric scores");
  meta->add_option("--lo", meta_cfg.lo, "Histogram lower bound")->capture_default_str();
  meta->add_option("--hi", meta_cfg.hi, "Histogram upper bound")->capture_default_str();
  meta->add_option("--histogram-out", meta_cfg.histogram_out, "Histogram TSV");
  meta->add_option("--out", meta_cfg.out_path, "Report as key<TAB>value TSV");
  add_signature_options(*meta, meta_cfg.model, meta_cfg.precision, meta_cfg.interp, meta_cfg.framework);

  SignatureConfig sig_cfg;
  auto* signature = app.add_subcommand("signature", "Print the reproducibility signature");
  signature->add_option("--model", sig_cfg.model, "Model identifier")->required();
  signature->add_option("--prec", sig_cfg.precision, "fp32, fp16, qint8 or unk")->capture_default_str();
  signature->add_option("--interp", sig_cfg.interp, "Interpreter version (skips probing)");
  signature->add_option("--framework", sig_cfg.framework, "Framework version (skips probing)");
  signature->add_flag("--detect", sig_cfg.detect, "Probe python3 and the comet package for versions");
  signature->add_option("--probe-interp", sig_cfg.probe_interp, "Command printing the interpreter version");
  signature->add_option("--probe-framework", sig_cfg.probe_framework, "Command printing the framework version");

  std::string cite_model, cite_db;
  auto* cite = app.add_subcommand("cite", "Print the URL and BibTeX for a model");
  cite->add_option("model", cite_model, "Model identifier, e.g. Unbabel/xcomet-xl")->required();
  cite->add_option("--db", cite_db, "Alternative citation database (JSON)")->check(CLI::ExistingFile);

  std::string report_path;
  auto* check = app.add_subcommand("check-reporting", "Find COMET model identifiers in a document");
  check->add_option("file", report_path, "Text file")->required()->check(CLI::ExistingFile);

  BiasConfig bias_cfg;
  auto* bias = app.add_subcommand("biaslab", "Toy-scale training-data bias experiments");
  bias->require_subcommand(1);
  auto add_bias_options = [&](CLI::App& cmd) {
    cmd.add_option("--seeds", bias_cfg.seeds, "Number of seeds")->capture_default_str();
    cmd.add_option("--seed", bias_cfg.seed, "First seed")->capture_default_str();
    cmd.add_option("--epochs", bias_cfg.epochs, "Training epochs (0 = default)");
    cmd.add_option("--lr", bias_cfg.learning_rate, "SGD learning rate (0 = default)");
    cmd.add_option("--train-size", bias_cfg.train_size, "Training examples per direction or tag (0 = default)");
    cmd.add_option("--out", bias_cfg.out_path, "Report TSV");
  };
  auto* dist = bias->add_subcommand("dist", "Score-distribution bias (top/bottom filtering)");
  add_bias_options(*dist);
  auto* tags = bias->add_subcommand("tags", "Year-tag domain bias");
  add_bias_options(*tags);

  std::string prof_lang, prof_corpus, prof_out;
  std::size_t prof_k = kDefaultProfileSize;
  auto* profiles = app.add_subcommand("profiles", "Language identification profiles");
  profiles->require_subcommand(1);
  auto* build = profiles->add_subcommand("build", "Build a profile from a corpus (default: bundled seed corpus)");
  build->add_option("--lang", prof_lang, "Language code")->required();
  build->add_option("--corpus", prof_corpus, "One sentence per line")->check(CLI::ExistingFile);
  build->add_option("--k", prof_k, "Profile size")->capture_default_str();
  build->add_option("--out", prof_out, "Profile file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream sink;
    app.exit(e, sink, err);
    return kConfigError;
  }

  try {
    if (*score) return run_score(score_cfg, cmdline, out, err);
    if (*multiref) return run_score(multiref_cfg, cmdline, out, err);
    if (*meta) return run_meta(meta_cfg, cmdline, out);
    if (*signature) return run_signature(sig_cfg, out, err);
    if (*cite) return run_cite(cite_model, cite_db, out);
    if (*check) return run_check_reporting(report_path, out);
    if (*dist) return run_biaslab_dist(bias_cfg, cmdline, out);
    if (*tags) return run_biaslab_tags(bias_cfg, cmdline, out);
    if (*build) return run_profiles_build(prof_lang, prof_corpus, prof_k, prof_out, cmdline, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace cometkit::cli
