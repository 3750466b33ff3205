// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cometkit/biaslab.hpp"
#include "cometkit/evalset.hpp"
#include "cometkit/guards.hpp"
#include "cometkit/metastats.hpp"
#include "cometkit/multiref.hpp"
#include "cometkit/process.hpp"
#include "cometkit/provenance.hpp"
#include "cometkit/scorer.hpp"
#include "cometkit/utf8.hpp"
#include "oracles.hpp"
#include "reporting_fixtures.hpp"
#include "testing.hpp"

using namespace cometkit;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

ProcessResult cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{COMETKIT_CLI_PATH};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, "");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// 1
Outcome signature_exactness() {
  Outcome o;
  const auto r = cli({"signature", "--model", "unite-mup", "--prec", "fp32", "--interp", "3.11.8", "--framework", "2.2.2"});
  o.check(r.ok() && r.out == "Python3.11.8|Comet2.2.2|fp32|unite-mup\n", "signature printed '" + r.out + "'");
  std::mt19937_64 rng(1);
  const Precision precs[] = {Precision::fp32, Precision::fp16, Precision::qint8, Precision::unk};
  const std::string chars = "abcdefghijklmnopqrstuvwxyz0123456789-_./ABCXYZ";
  auto version = [&] {
    if (rng() % 5 == 0) return std::string(kUnknown);
    std::string v = std::to_string(rng() % 12);
    for (int i = 0, n = 1 + rng() % 3; i < n; ++i) v += "." + std::to_string(rng() % 40);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    SignatureFields f;
    f.interpreter_version = version();
    f.framework_version = version();
    f.precision = precs[rng() % 4];
    for (int k = 0, n = 1 + rng() % 30; k < n; ++k) f.model += chars[rng() % chars.size()];
    const auto s = make_signature(f);
    o.check(parse_signature(s) == f && make_signature(parse_signature(s)) == s, "round trip failed for " + s);
  }
  return o;
}

// 2
Outcome citation_exactness() {
  Outcome o;
  const auto a = cli({"cite", "Unbabel/xcomet-xl"});
  o.check(a.ok() && a.out.rfind("https://arxiv.org/abs/2310.10482\n@", 0) == 0, "xcomet-xl cite: " + a.out);
  const auto b = cli({"cite", "wmt22-comet-da"});
  const auto base = cli({"cite", "comet-framework"});
  const auto url_of = [](const std::string& out) { return out.substr(0, out.find('\n')); };
  o.check(b.ok() && base.ok(), "cite failed: " + b.err + base.err);
  o.check(url_of(b.out) != url_of(base.out), "wmt22-comet-da resolved to the base framework entry");
  o.check(b.out.find("2022") != std::string::npos && b.out.find("2020") == std::string::npos,
          "wmt22-comet-da does not cite the 2022 system description");
  return o;
}

// 3
Outcome reporting_regex() {
  Outcome o;
  std::size_t agree = 0;
  for (const auto& c : reporting_fixtures()) {
    const bool same = check_reporting(c.text) == c.matches;
    agree += same;
    o.check(same, "mismatch on '" + c.text + "'");
  }
  o.check(reporting_fixtures().size() == 20, "fixture table must have 20 cases");
  if (o.pass) o.detail = std::to_string(agree) + "/20 agree";
  return o;
}

// 4
Outcome agg_oracle() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 6> s{};
    for (auto& v : s) v = u(rng);
    worst = std::max(worst, std::abs(agg_combine(s) - oracle::agg({s.begin(), s.end()})));
  }
  o.check(worst <= 1e-12, "max deviation " + fmt(worst));
  for (int i = 0; i < 1000; ++i) {
    const double c = i == 0 ? 0.0 : i == 1 ? 1.0 : u(rng) * 4 - 2;
    const std::array<double, 6> s{c, c, c, c, c, c};
    o.check(agg_combine(s) == c, "constant tuple " + fmt(c) + " not returned exactly");
  }
  if (o.pass) o.detail = "max deviation " + fmt(worst);
  return o;
}

// 5
Outcome rank_statistics() {
  Outcome o;
  std::mt19937_64 rng(5);
  auto vec = [&](std::size_t n) {
    const int levels = 1 + rng() % 8;
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng() % levels) * 0.1;
    return v;
  };
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 9;
    const auto x = vec(n), y = vec(n);
    worst = std::max({worst, std::abs(kendall_tau_a(x, y) - oracle::tau_a(x, y)),
                      std::abs(kendall_tau_c(x, y) - oracle::tau_c(x, y))});
    SystemRanking m, h;
    for (std::size_t k = 0; k < n; ++k) {
      m.entries.emplace_back("s" + std::to_string(k), x[k]);
      h.entries.emplace_back("s" + std::to_string(k), y[k]);
    }
    worst = std::max(worst, std::abs(pairwise_accuracy(m, h) - oracle::pairwise_accuracy(x, y)));
  }
  o.check(worst <= 1e-12, "max deviation " + fmt(worst));
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 9;
    const auto x = vec(n), y = vec(n);
    std::vector<double> tx(n), ty(n);
    std::transform(x.begin(), x.end(), tx.begin(), [](double v) { return std::exp(5 * v) + 3; });
    std::transform(y.begin(), y.end(), ty.begin(), [](double v) { return std::atan(v) * 10 - 1; });
    SystemRanking m, h, mt, ht;
    for (std::size_t k = 0; k < n; ++k) {
      const auto name = "s" + std::to_string(k);
      m.entries.emplace_back(name, x[k]);
      h.entries.emplace_back(name, y[k]);
      mt.entries.emplace_back(name, tx[k]);
      ht.entries.emplace_back(name, ty[k]);
    }
    o.check(kendall_tau_a(x, y) == kendall_tau_a(tx, ty) && kendall_tau_c(x, y) == kendall_tau_c(tx, ty) &&
                pairwise_accuracy(m, h) == pairwise_accuracy(mt, ht),
            "monotone transform changed a statistic");
  }
  if (o.pass) o.detail = "max deviation " + fmt(worst);
  return o;
}

// 6
Outcome guards() {
  Outcome o;
  std::mt19937_64 rng(6);
  const auto profiles = bundled_profiles();
  const std::vector<std::string> pool{"",
                                      " ",
                                      "\t \t",
                                      "\xe3\x80\x80",
                                      "Die Ergebnisse werden im nächsten Monat veröffentlicht.",
                                      "这个城市的冬天非常寒冷，很多人都喜欢待在家里看书。",
                                      "The results will be published next month.",
                                      "Hallo"};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Segment> segs;
    std::vector<double> raw;
    for (std::size_t i = 0, n = 1 + rng() % 20; i < n; ++i) {
      segs.push_back({i, "source text", pool[rng() % pool.size()], {"reference"}});
      raw.push_back(u(rng));
    }
    const EvalSet set(Direction::parse("en-de"), "sys", segs);
    const ScoreTable t("sys", raw);
    const auto once = apply_lang_guard(set, apply_empty_guard(set, t).scores, profiles, {"de"}).scores;
    for (const auto& s : set.segments()) {
      if (is_empty_hypothesis(s.hypothesis)) o.check(once.score(s.index) == 0.0, "whitespace-only hypothesis kept a score");
    }
    const auto twice_empty = apply_empty_guard(set, apply_empty_guard(set, t).scores).scores;
    o.check(twice_empty == apply_empty_guard(set, t).scores, "empty guard not idempotent");
    const auto lang1 = apply_lang_guard(set, t, profiles, {"de"}).scores;
    o.check(apply_lang_guard(set, lang1, profiles, {"de"}).scores == lang1, "language guard not idempotent");
    o.check(apply_lang_guard(set, apply_empty_guard(set, once).scores, profiles, {"de"}).scores == once,
            "combined guards not idempotent");
  }
  // 10% empty injection under the surrogate
  const auto corpus = bundled_seed_corpus("de");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < 40; ++i) segs.push_back({i, corpus[i], corpus[i], {corpus[i]}});
  const EvalSet clean(Direction::parse("en-de"), "sys", segs);
  for (std::size_t i = 0; i < segs.size(); i += 10) segs[i].hypothesis = "";
  const EvalSet injected(Direction::parse("en-de"), "sys", segs);
  const auto score_of = [&](const EvalSet& set) {
    const ScoreTable raw("sys", score_batch(SurrogateBackend{}, make_requests(set)));
    return system_score(apply_empty_guard(set, raw).scores);
  };
  const double before = score_of(clean), after = score_of(injected);
  o.check(after < before, "injection did not lower the system score");
  if (o.pass) o.detail = "system score " + fmt(before) + " -> " + fmt(after);
  return o;
}

// 7
Outcome language_id() {
  Outcome o;
  std::vector<LanguageProfile> profiles;
  std::vector<std::pair<std::string, std::string>> held_out;
  for (const auto& lang : {"en", "de", "zh", "ru", "uk"}) {
    const auto corpus = bundled_seed_corpus(lang);
    std::vector<std::string> train;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (i % 4 == 3) {
        if (utf8::decode(corpus[i]).size() >= 40) held_out.emplace_back(lang, corpus[i]);
      } else {
        train.push_back(corpus[i]);
      }
    }
    profiles.push_back(build_language_profile(train, lang));
  }
  std::size_t correct = 0;
  std::string first_miss;
  for (const auto& [lang, text] : held_out) {
    const auto guess = identify_language(text, profiles);
    if (guess.lang == lang) {
      ++correct;
    } else if (first_miss.empty()) {
      first_miss = "; first miss: " + lang + " taken for " + guess.lang;
    }
  }
  const double acc = held_out.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(held_out.size());
  o.check(held_out.size() >= 50, "too few held-out sentences");
  o.check(acc >= 0.95, "accuracy " + fmt(acc));
  o.detail = std::to_string(correct) + "/" + std::to_string(held_out.size()) + " correct" + first_miss;
  return o;
}

// 8
Outcome distribution_bias() {
  Outcome o;
  std::vector<biaslab::DistributionReport> reports;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) reports.push_back(biaslab::distribution_bias_experiment(seed));
  const auto p = biaslab::check_distribution_pattern(reports);
  o.check(p.top_raises_a >= 4, "top filter raised A in " + std::to_string(p.top_raises_a) + "/5 seeds");
  o.check(p.bottom_lowers_a >= 4, "bottom filter lowered A in " + std::to_string(p.bottom_lowers_a) + "/5 seeds");
  o.check(p.mean_shift_b_top < 0.5 * p.mean_shift_a_top, "B moved too much under the top filter");
  o.check(p.mean_shift_b_bottom < 0.5 * p.mean_shift_a_bottom, "B moved too much under the bottom filter");
  if (o.pass) {
    o.detail = "top " + std::to_string(p.top_raises_a) + "/5, bottom " + std::to_string(p.bottom_lowers_a) +
               "/5, |dB|/|dA| top " + fmt(p.mean_shift_b_top / p.mean_shift_a_top) + " bottom " +
               fmt(p.mean_shift_b_bottom / p.mean_shift_a_bottom);
  }
  return o;
}

// 9
Outcome tag_bias() {
  Outcome o;
  std::vector<biaslab::TagReport> reports;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) reports.push_back(biaslab::tag_bias_experiment(seed));
  // recomputed here from the raw reports rather than trusting check_tag_pattern
  std::size_t monotone = 0;
  const auto idx = [&](const std::string& tag) {
    const auto& t = reports.front().tags;
    return static_cast<std::size_t>(std::find(t.begin(), t.end(), tag) - t.begin());
  };
  for (const auto& r : reports) {
    const double a = r.mean_prediction[idx("2019")], b = r.mean_prediction[idx("2020")],
                 c = r.mean_prediction[idx("2021")];
    monotone += a <= b && b <= c;
  }
  const auto avg = [&](const std::string& tag) {
    double s = 0;
    for (const auto& r : reports) s += r.mean_prediction[idx(tag)];
    return s / static_cast<double>(reports.size());
  };
  std::string above;
  for (const auto& tag : {"2022", "2023", "2024", "2025"}) {
    if (avg(tag) > avg("2019")) above += std::string(above.empty() ? "" : ",") + tag;
  }
  o.check(monotone >= 4, "seen tags non-decreasing in " + std::to_string(monotone) + "/5 seeds");
  o.check(!above.empty(), "no unseen tag scores above 2019");
  o.check(biaslab::check_tag_pattern(reports).holds() == o.pass, "library pattern check disagrees");
  if (o.pass) o.detail = "monotone " + std::to_string(monotone) + "/5, above 2019: " + above;
  return o;
}

// 10
Outcome determinism() {
  Outcome o;
  testing_support::TempDir dir("cometkit-accept");
  std::mt19937_64 rng(10);
  std::vector<std::string> src, hyp, ref, alt;
  const auto corpus = bundled_seed_corpus("de");
  for (std::size_t i = 0; i < 200; ++i) {
    src.push_back("source sentence number " + std::to_string(i));
    hyp.push_back(i % 17 == 0 ? "" : corpus[rng() % corpus.size()]);
    ref.push_back(corpus[rng() % corpus.size()]);
    alt.push_back(corpus[rng() % corpus.size()]);
  }
  const auto s = dir.write_lines("src.txt", src).string(), h = dir.write_lines("hyp.txt", hyp).string(),
             r = dir.write_lines("ref.txt", ref).string(), a = dir.write_lines("alt.txt", alt).string();
  const auto pre = dir.write("pre.tsv", [] {
    std::string t;
    for (int i = 0; i < 200; ++i) t += std::to_string(i) + "\t" + std::to_string(i % 7) + "\n";
    return t;
  }()).string();
  const auto doc = dir.write("report.txt", "We report wmt22-comet-da and XCOMET-XL.\n").string();
  const auto out = (dir / "out.tsv").string();
  const auto side = (dir / "side.tsv").string();
  const std::string fake = FAKE_SCORER_PATH;
  const std::vector<std::string> common{"--src", s, "--hyp", h, "--lang-pair", "en-de"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::vector<std::vector<std::string>> runs{
      with(with({"score"}, common), {"--ref", r, "--guard-empty", "--guard-lang", "--guard-report", side, "--jobs", "4", "--out", out}),
      with(with({"score"}, common), {"--ref", r, "--backend", "external", "--cmd", fake + " echo", "--shard-size", "7", "--jobs", "4", "--out", out}),
      with(with({"score"}, common), {"--backend", "precomputed", "--scores", pre, "--out", out}),
      with(with({"multiref"}, common), {"--ref", r, "--ref", a, "--multiref", "agg", "--backend", "external", "--cmd", fake + " echo", "--shard-size", "50", "--jobs", "3", "--out", out}),
      with(with({"multiref"}, common), {"--ref", r, "--ref", a, "--multiref", "max", "--out", out}),
      {"meta", pre, pre, "--histogram-bins", "29", "--lo", "0", "--hi", "10", "--histogram-out", side, "--out", out},
      {"biaslab", "dist", "--seeds", "2", "--train-size", "200", "--epochs", "2", "--out", out},
      {"biaslab", "tags", "--seeds", "2", "--train-size", "200", "--epochs", "2", "--out", out},
      {"profiles", "build", "--lang", "uk", "--out", out},
      {"signature", "--model", "xcomet-xl", "--prec", "qint8"},
      {"cite", "unbabel/wmt22-cometkiwi-da"},
      {"check-reporting", doc},
  };
  for (const auto& args : runs) {
    std::vector<std::string> snap[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::filesystem::remove(out);
      std::filesystem::remove(side);
      const auto res = cli(args);
      o.check(res.ok(), args[0] + " failed: " + res.err);
      snap[rep] = {res.out, std::filesystem::exists(out) ? read_file(out) : "",
                   std::filesystem::exists(side) ? read_file(side) : ""};
    }
    o.check(snap[0] == snap[1], args[0] + " " + args[1] + " output differs between runs");
  }
  // sharded external scoring agrees with the unsharded run
  const auto one = cli(with(with({"score"}, common), {"--ref", r, "--backend", "external", "--cmd", fake + " echo"}));
  const auto many = cli(with(with({"score"}, common),
                             {"--ref", r, "--backend", "external", "--cmd", fake + " echo", "--shard-size", "3", "--jobs", "8"}));
  const auto body = [](const std::string& text) { return text.substr(0, text.find("\n# command")); };
  o.check(one.ok() && many.ok() && body(one.out) == body(many.out), "sharding changed the scores");
  if (o.pass) o.detail = std::to_string(runs.size()) + " invocations byte-identical";
  return o;
}

// 11
Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(11);
  const biaslab::DirectionPrior priors[] = {{Direction{"en", "de"}, 0.841}, {Direction{"en", "zh"}, 0.775}};
  auto data = biaslab::generate_synth(priors, 5, 11);
  data[3].tag = "2020";
  auto scorer = biaslab::train(data, 1, 0.0005, 1).scorer;
  std::normal_distribution<double> noise(0.0, 0.02);
  double worst = 0;
  for (const auto& e : data) {
    const auto x = biaslab::featurize(e);
    for (const auto& [i, v] : x) scorer.weights[i] += noise(rng);
    const auto g = biaslab::example_gradient(scorer, x, e.gold_da);
    for (int k = 0; k < 10; ++k) {
      const auto idx = x[rng() % x.size()].first;
      double analytic = 0;
      for (const auto& [j, gj] : g.weights) analytic += j == idx ? gj : 0.0;
      const double step = 1e-5;
      auto plus = scorer, minus = scorer;
      plus.weights[idx] += step;
      minus.weights[idx] -= step;
      const double fd = (biaslab::example_loss(plus, x, e.gold_da) - biaslab::example_loss(minus, x, e.gold_da)) / (2 * step);
      const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-12});
      worst = std::max(worst, rel);
    }
    auto plus = scorer, minus = scorer;
    plus.bias += 1e-5;
    minus.bias -= 1e-5;
    const double fd = (biaslab::example_loss(plus, x, e.gold_da) - biaslab::example_loss(minus, x, e.gold_da)) / 2e-5;
    worst = std::max(worst, std::abs(fd - g.bias) / std::max({std::abs(fd), std::abs(g.bias), 1e-12}));
  }
  o.check(worst < 1e-4, "worst relative error " + fmt(worst));
  if (o.pass) o.detail = "worst relative error " + fmt(worst);
  return o;
}

// 12
Outcome wire_protocol() {
  Outcome o;
  testing_support::TempDir dir("cometkit-wire");
  std::mt19937_64 rng(12);
  const std::vector<std::string> atoms{"a", "Z", " ", "\t", "\n", "\\", "\\t", "\\n", "\\\\", "ß", "中", "\r", "'", "\""};
  auto text = [&] {
    std::string t;
    for (int i = 0, n = rng() % 25; i < n; ++i) t += atoms[rng() % atoms.size()];
    return t;
  };
  std::vector<ScoreRequest> reqs(10000);
  for (auto& r : reqs) r = {text(), text(), text()};
  const auto dump = (dir / "dump.txt").string();
  const ExternalBackend backend{{FAKE_SCORER_PATH, "echo", dump}, {}, 0, 1};
  std::vector<double> scores;
  try {
    scores = score_batch(backend, reqs);
  } catch (const std::exception& e) {
    o.check(false, e.what());
    return o;
  }
  o.check(scores.size() == reqs.size(), "response count " + std::to_string(scores.size()));
  // expected scores and dump, computed from the original strings
  std::string expected_dump;
  std::size_t corrupt = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto* f : {&reqs[i].source, &reqs[i].hypothesis, &*reqs[i].reference}) {
      for (unsigned char c : *f) h = (h ^ c) * 1099511628211ULL;
      h = (h ^ 0xFF) * 1099511628211ULL;
      expected_dump += std::to_string(f->size()) + ":" + *f;
    }
    expected_dump += "\n";
    if (i < scores.size() && scores[i] != static_cast<double>(h >> 11)) ++corrupt;
  }
  o.check(corrupt == 0, std::to_string(corrupt) + " lines corrupted");
  o.check(read_file(dump) == expected_dump, "child saw different bytes than were sent");
  bool short_caught = false;
  try {
    score_batch(ExternalBackend{{FAKE_SCORER_PATH, "short"}, {}, 0, 1}, reqs);
  } catch (const Error&) {
    short_caught = true;
  }
  o.check(short_caught, "a short response was accepted");
  if (o.pass) o.detail = "10000 lines, 0 corrupted, short response rejected";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
    double budget_s;  // 0 = no runtime bound
  };
  const std::vector<Criterion> criteria{
      {1, "signature exactness", signature_exactness, 1.0},
      {2, "citation exactness", citation_exactness, 0},
      {3, "reporting regex fixtures", reporting_regex, 0},
      {4, "agg combiner oracle", agg_oracle, 0},
      {5, "rank statistics oracle", rank_statistics, 0},
      {6, "guards", guards, 0},
      {7, "language identification holdout", language_id, 10.0},
      {8, "distribution-bias pattern", distribution_bias, 120.0},
      {9, "tag-bias pattern", tag_bias, 120.0},
      {10, "determinism", determinism, 0},
      {11, "gradient check", gradient_check, 0},
      {12, "wire protocol round trip", wire_protocol, 0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.budget_s) + " s budget)";
    }
    failures += !o.pass;
    std::printf("[%s] %2d %-34s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
