#include "cometkit/biaslab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "cometkit/error.hpp"
#include "cometkit/utf8.hpp"

namespace cometkit::biaslab {

namespace {

// std distributions are implementation-defined; these transforms keep runs
// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double normal(double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string random_text(Rng& rng, std::string_view alphabet, std::size_t len, double space_rate) {
  std::string text;
  text.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const bool space = i > 0 && i + 1 < len && text.back() != ' ' && rng.uniform() < space_rate;
    text += space ? ' ' : alphabet[rng.below(alphabet.size())];
  }
  return text;
}

std::string corrupt(Rng& rng, std::string_view reference, std::string_view alphabet, double rate) {
  std::string out;
  out.reserve(reference.size());
  for (char c : reference) {
    if (rng.uniform() >= rate) {
      out += c;
    } else if (rng.uniform() >= 0.5) {
      out += alphabet[rng.below(alphabet.size())];
    }
  }
  return out;
}

void add_char_ngrams(char space, std::string_view text, const Config& config, std::map<std::uint32_t, double>& acc) {
  const auto cps = utf8::decode(text);
  for (std::size_t n = 1; n <= config.max_order; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      const auto gram = utf8::encode(std::u32string_view(cps).substr(i, n));
      acc[feature_index(space, gram, config.hash_seed, config.dim_log2)] += 1.0;
    }
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string alphabet_for(std::string_view lang, std::size_t size) {
  std::string letters = "abcdefghijklmnopqrstuvwxyz";
  size = std::clamp<std::size_t>(size, 1, letters.size());
  Rng rng(fnv1a(lang));
  std::vector<char> pool(letters.begin(), letters.end());
  rng.shuffle(pool);
  std::string alphabet(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(alphabet.begin(), alphabet.end());
  return alphabet;
}

Dataset generate_synth(std::span<const DirectionPrior> directions, std::size_t n_per_direction, std::uint64_t seed,
                       const Config& config) {
  for (const auto& d : directions) {
    if (!(d.mean_da >= 0.0 && d.mean_da <= 1.0)) {
      throw Error("synthetic prior for " + d.direction.str() + " must lie in [0, 1]");
    }
  }
  if (config.ref_min_len == 0 || config.ref_min_len > config.ref_max_len) throw Error("invalid reference length range");
  Rng rng(seed);
  Dataset data;
  data.reserve(directions.size() * n_per_direction);
  for (const auto& prior : directions) {
    const auto src_alpha = alphabet_for(prior.direction.src_lang, config.alphabet_size);
    const auto tgt_alpha = alphabet_for(prior.direction.tgt_lang, config.alphabet_size);
    const std::size_t span = config.ref_max_len - config.ref_min_len + 1;
    for (std::size_t i = 0; i < n_per_direction; ++i) {
      SynthExample ex;
      ex.direction = prior.direction;
      ex.quality = rng.uniform();
      ex.source = random_text(rng, src_alpha, config.ref_min_len + rng.below(span), config.space_rate);
      ex.reference = random_text(rng, tgt_alpha, config.ref_min_len + rng.below(span), config.space_rate);
      ex.hypothesis = corrupt(rng, ex.reference, tgt_alpha, (1.0 - ex.quality) * config.noise_scale);
      const double noise = rng.normal(config.noise_sigma);
      ex.gold_da = std::clamp(prior.mean_da + config.da_slope * (ex.quality - 0.5) + noise, 0.0, 1.0);
      data.push_back(std::move(ex));
    }
  }
  return data;
}

std::uint32_t feature_index(char space, std::string_view gram, std::uint64_t hash_seed, unsigned dim_log2) {
  const char prefix[2] = {space, '\x1f'};
  const std::uint64_t h = splitmix(fnv1a(gram, fnv1a(std::string_view(prefix, 2))) ^ hash_seed);
  return static_cast<std::uint32_t>(h & ((std::uint64_t{1} << dim_log2) - 1));
}

SparseVector featurize(const SynthExample& example, const Config& config) {
  std::map<std::uint32_t, double> acc;
  add_char_ngrams('h', example.hypothesis, config, acc);
  add_char_ngrams('r', example.reference, config, acc);
  acc[feature_index('d', example.direction.str(), config.hash_seed, config.dim_log2)] += 1.0;
  if (example.tag) acc[feature_index('t', *example.tag, config.hash_seed, config.dim_log2)] += 1.0;
  return SparseVector(acc.begin(), acc.end());
}

double ToyScorer::dot(const SparseVector& features) const {
  double sum = 0.0;
  for (const auto& [idx, value] : features) sum += weights[idx] * value;
  return sum;
}

double ToyScorer::predict(const SparseVector& features) const { return bias + dot(features); }

double ToyScorer::predict(const SynthExample& example) const {
  Config cfg;
  cfg.hash_seed = hash_seed;
  cfg.dim_log2 = dim_log2;
  cfg.max_order = max_order;
  return predict(featurize(example, cfg));
}

double example_loss(const ToyScorer& scorer, const SparseVector& features, double gold) {
  const double r = scorer.predict(features) - gold;
  return 0.5 * r * r;
}

Gradient example_gradient(const ToyScorer& scorer, const SparseVector& features, double gold) {
  const double r = scorer.predict(features) - gold;
  Gradient g;
  g.bias = r;
  g.weights.reserve(features.size());
  for (const auto& [idx, value] : features) g.weights.emplace_back(idx, r * value);
  return g;
}

TrainResult train(const Dataset& dataset, std::size_t epochs, double learning_rate, std::uint64_t seed,
                  const Config& config) {
  if (dataset.empty()) throw Error("cannot train on an empty dataset");
  if (config.dim_log2 == 0 || config.dim_log2 > 30) throw Error("feature dimension must be 2^1 .. 2^30");
  TrainResult result;
  ToyScorer& scorer = result.scorer;
  scorer.weights.assign(std::size_t{1} << config.dim_log2, 0.0);
  scorer.hash_seed = config.hash_seed;
  scorer.dim_log2 = config.dim_log2;
  scorer.max_order = config.max_order;

  std::vector<SparseVector> features;
  std::vector<double> gold;
  features.reserve(dataset.size());
  for (const auto& ex : dataset) {
    features.push_back(featurize(ex, config));
    gold.push_back(ex.gold_da);
  }
  scorer.bias = mean_of(gold);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (std::size_t i : order) {
      loss += example_loss(scorer, features[i], gold[i]);
      const auto grad = example_gradient(scorer, features[i], gold[i]);
      scorer.bias -= learning_rate * grad.bias;
      for (const auto& [idx, g] : grad.weights) scorer.weights[idx] -= learning_rate * g;
    }
    loss /= static_cast<double>(dataset.size());
    if (!std::isfinite(loss)) throw Error("training diverged at epoch " + std::to_string(epoch + 1));
    result.epoch_loss.push_back(loss);
  }
  return result;
}

Dataset filter_fraction(const Dataset& dataset, const Direction& direction, Keep keep, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("filter fraction must lie in (0, 1]");
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].direction == direction) members.push_back(i);
  }
  if (members.empty()) throw Error("direction " + direction.str() + " is absent from the dataset");

  std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    return keep == Keep::top ? dataset[a].gold_da > dataset[b].gold_da : dataset[a].gold_da < dataset[b].gold_da;
  });
  const auto kept_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size()))));
  std::vector<bool> dropped(dataset.size(), false);
  for (std::size_t k = kept_count; k < members.size(); ++k) dropped[members[k]] = true;

  Dataset out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dropped[i]) out.push_back(dataset[i]);
  }
  return out;
}

double mean_prediction(const ToyScorer& scorer, std::span<const SynthExample> examples) {
  if (examples.empty()) throw Error("mean prediction over no examples");
  double sum = 0.0;
  for (const auto& ex : examples) sum += scorer.predict(ex);
  return sum / static_cast<double>(examples.size());
}

DistributionReport distribution_bias_experiment(std::uint64_t seed, const Config& config) {
  const std::vector<DirectionPrior> priors{config.dir_a, config.dir_b};
  const Dataset train_all = generate_synth(priors, config.train_per_direction, seed, config);
  const Dataset test = generate_synth(priors, config.test_per_direction, splitmix(seed ^ 0x7e57), config);

  const auto& a = config.dir_a.direction;
  const auto& b = config.dir_b.direction;
  std::vector<std::pair<std::string, Dataset>> variants;
  variants.emplace_back("all", train_all);
  const auto pct = std::to_string(static_cast<int>(std::lround(config.filter_fraction * 100)));
  for (const auto* d : {&a, &b}) {
    variants.emplace_back("top" + pct + "(" + d->str() + ")", filter_fraction(train_all, *d, Keep::top, config.filter_fraction));
    variants.emplace_back("bottom" + pct + "(" + d->str() + ")",
                          filter_fraction(train_all, *d, Keep::bottom, config.filter_fraction));
  }

  std::vector<Dataset> test_by_dir(2);
  for (const auto& ex : test) test_by_dir[ex.direction == a ? 0 : 1].push_back(ex);

  DistributionReport report;
  report.columns = {a, b};
  for (const auto& [name, data] : variants) {
    const auto trained = train(data, config.epochs, config.learning_rate, seed, config);
    report.rows.push_back(name);
    report.mean_scores.push_back(
        {mean_prediction(trained.scorer, test_by_dir[0]), mean_prediction(trained.scorer, test_by_dir[1])});
  }
  return report;
}

void check_tag_collisions(std::span<const std::string> tags, const Config& config) {
  std::map<std::uint32_t, std::string> seen;
  for (const auto& tag : tags) {
    const auto idx = feature_index('t', tag, config.hash_seed, config.dim_log2);
    if (const auto [it, fresh] = seen.emplace(idx, tag); !fresh && it->second != tag) {
      throw Error("tag features collide: '" + it->second + "' and '" + tag + "'");
    }
  }
}

TagReport tag_bias_experiment(std::uint64_t seed, const Config& config) {
  TagReport report;
  for (int year = config.first_test_tag; year <= config.last_test_tag; ++year) report.tags.push_back(std::to_string(year));
  std::vector<std::string> all_tags = report.tags;
  for (const auto& [tag, mean] : config.tag_means) all_tags.push_back(tag);
  check_tag_collisions(all_tags, config);

  Dataset train_set;
  std::map<std::string, double> train_means;
  for (std::size_t t = 0; t < config.tag_means.size(); ++t) {
    const auto& [tag, mean] = config.tag_means[t];
    const DirectionPrior prior{config.tag_direction, mean};
    auto part = generate_synth(std::span(&prior, 1), config.train_per_direction, splitmix(seed + t), config);
    double sum = 0.0;
    for (auto& ex : part) {
      ex.tag = tag;
      sum += ex.gold_da;
    }
    train_means[tag] = sum / static_cast<double>(part.size());
    std::move(part.begin(), part.end(), std::back_inserter(train_set));
  }

  double overall = 0.0;
  for (const auto& [tag, mean] : config.tag_means) overall += mean;
  const DirectionPrior test_prior{config.tag_direction, overall / static_cast<double>(config.tag_means.size())};
  Dataset test = generate_synth(std::span(&test_prior, 1), config.test_per_direction, splitmix(seed ^ 0x7e57), config);

  const auto trained = train(train_set, config.epochs, config.learning_rate, seed, config);
  for (const auto& tag : report.tags) {
    for (auto& ex : test) ex.tag = tag;
    report.mean_prediction.push_back(mean_prediction(trained.scorer, test));
    const auto it = train_means.find(tag);
    report.train_mean.push_back(it == train_means.end() ? std::nullopt : std::optional<double>(it->second));
  }
  return report;
}

bool DistributionPattern::holds() const {
  const std::size_t need = seeds - seeds / 5;  // 4 of 5
  return seeds > 0 && top_raises_a >= need && bottom_lowers_a >= need && mean_shift_b_top < 0.5 * mean_shift_a_top &&
         mean_shift_b_bottom < 0.5 * mean_shift_a_bottom;
}

DistributionPattern check_distribution_pattern(std::span<const DistributionReport> reports) {
  DistributionPattern p;
  p.seeds = reports.size();
  for (const auto& r : reports) {
    if (r.mean_scores.size() < 3) throw Error("distribution report needs the all/top/bottom rows");
    const auto& all = r.mean_scores[0];
    const auto& top = r.mean_scores[1];
    const auto& bottom = r.mean_scores[2];
    p.top_raises_a += top[0] > all[0];
    p.bottom_lowers_a += bottom[0] < all[0];
    p.mean_shift_a_top += std::abs(top[0] - all[0]);
    p.mean_shift_b_top += std::abs(top[1] - all[1]);
    p.mean_shift_a_bottom += std::abs(bottom[0] - all[0]);
    p.mean_shift_b_bottom += std::abs(bottom[1] - all[1]);
  }
  if (p.seeds > 0) {
    const double n = static_cast<double>(p.seeds);
    p.mean_shift_a_top /= n;
    p.mean_shift_b_top /= n;
    p.mean_shift_a_bottom /= n;
    p.mean_shift_b_bottom /= n;
  }
  return p;
}

bool TagPattern::holds() const {
  const std::size_t need = seeds - seeds / 5;
  return seeds > 0 && monotone_seen >= need && !best_unseen_tag.empty() && best_unseen_after > mean_2019 &&
         max_tag_spread > 0.0;
}

TagPattern check_tag_pattern(std::span<const TagReport> reports, const Config& config) {
  TagPattern p;
  p.seeds = reports.size();
  if (reports.empty()) return p;
  const auto& tags = reports.front().tags;
  std::vector<double> avg(tags.size(), 0.0);
  for (const auto& r : reports) {
    if (r.tags != tags) throw Error("tag reports cover different tags");
    std::map<std::string, double> by_tag;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      by_tag[tags[i]] = r.mean_prediction[i];
      avg[i] += r.mean_prediction[i] / static_cast<double>(reports.size());
    }
    bool monotone = true;
    for (std::size_t t = 1; t < config.tag_means.size(); ++t) {
      monotone = monotone && by_tag.at(config.tag_means[t - 1].first) <= by_tag.at(config.tag_means[t].first);
    }
    p.monotone_seen += monotone;
    double lo = r.mean_prediction.front(), hi = lo;
    for (double v : r.mean_prediction) lo = std::min(lo, v), hi = std::max(hi, v);
    p.max_tag_spread += (hi - lo) / static_cast<double>(reports.size());
  }

  std::set<std::string> seen;
  for (const auto& [tag, mean] : config.tag_means) seen.insert(tag);
  const std::string& first_seen = config.tag_means.front().first;
  const std::string& last_seen = config.tag_means.back().first;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == first_seen) p.mean_2019 = avg[i];
    if (seen.contains(tags[i]) || tags[i] <= last_seen) continue;
    if (p.best_unseen_tag.empty() || avg[i] > p.best_unseen_after) {
      p.best_unseen_after = avg[i];
      p.best_unseen_tag = tags[i];
    }
  }
  return p;
}

std::string render_distribution_tsv(const DistributionReport& report) {
  std::string out = "training_data";
  for (const auto& c : report.columns) out += "\t" + c.str();
  out += '\n';
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    out += report.rows[r];
    for (double v : report.mean_scores[r]) out += "\t" + format_score(v);
    out += '\n';
  }
  return out;
}

std::string render_tag_tsv(const TagReport& report) {
  std::string out = "tag\ttrain_mean\ttest_mean_prediction\n";
  for (std::size_t i = 0; i < report.tags.size(); ++i) {
    out += report.tags[i] + "\t" + (report.train_mean[i] ? format_score(*report.train_mean[i]) : "unseen") + "\t" +
           format_score(report.mean_prediction[i]) + "\n";
  }
  return out;
}

}  // namespace cometkit::biaslab
