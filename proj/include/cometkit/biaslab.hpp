#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cometkit/evalset.hpp"

namespace cometkit::biaslab {

struct DirectionPrior {
  Direction direction;
  double mean_da = 0.0;
};

// Experiment knobs. The DA priors default to per-direction human DA means
// observed in WMT data (En-De 0.841, En-Zh 0.775) and the per-year train
// means 0.721 / 0.735 / 0.749.
struct Config {
  // synthetic data
  double noise_scale = 0.5;  // corruption rate = (1 - quality) * noise_scale
  double da_slope = 0.3;
  double noise_sigma = 0.05;
  std::size_t ref_min_len = 20;
  std::size_t ref_max_len = 40;
  std::size_t alphabet_size = 12;
  double space_rate = 0.15;

  // scorer
  unsigned dim_log2 = 18;
  std::uint64_t hash_seed = 0x9e3779b97f4a7c15ULL;
  std::size_t max_order = 3;
  std::size_t epochs = 20;
  double learning_rate = 0.0005;

  // experiments
  std::size_t train_per_direction = 2000;
  std::size_t test_per_direction = 500;
  double filter_fraction = 0.75;
  DirectionPrior dir_a{Direction{"en", "de"}, 0.841};
  DirectionPrior dir_b{Direction{"en", "zh"}, 0.775};
  Direction tag_direction{"en", "de"};
  std::vector<std::pair<std::string, double>> tag_means{{"2019", 0.721}, {"2020", 0.735}, {"2021", 0.749}};
  int first_test_tag = 2018;
  int last_test_tag = 2025;
};

struct SynthExample {
  Direction direction;
  std::string source;
  std::string hypothesis;
  std::string reference;
  std::optional<std::string> tag;
  double gold_da = 0.0;
  double quality = 0.0;

  friend bool operator==(const SynthExample&, const SynthExample&) = default;
};

using Dataset = std::vector<SynthExample>;

// Letters used for synthetic text in `lang`; fixed per language code.
std::string alphabet_for(std::string_view lang, std::size_t size);

// Deterministic under `seed`. Each hypothesis is its reference corrupted at
// rate (1 - quality) * noise_scale; gold_da tracks quality around the prior mean.
Dataset generate_synth(std::span<const DirectionPrior> directions, std::size_t n_per_direction, std::uint64_t seed,
                       const Config& config = {});

// Sorted (index, value) pairs with unique indices.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Hash of (namespace, gram) into [0, 2^dim_log2).
std::uint32_t feature_index(char space, std::string_view gram, std::uint64_t hash_seed, unsigned dim_log2);

SparseVector featurize(const SynthExample& example, const Config& config = {});

struct ToyScorer {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint64_t hash_seed = 0;
  unsigned dim_log2 = 0;
  std::size_t max_order = 3;

  double predict(const SparseVector& features) const;
  double predict(const SynthExample& example) const;
  // Non-bias part of the prediction (the dot product).
  double dot(const SparseVector& features) const;
};

// 0.5 * (prediction - gold)^2
double example_loss(const ToyScorer& scorer, const SparseVector& features, double gold);

struct Gradient {
  SparseVector weights;
  double bias = 0.0;
};

Gradient example_gradient(const ToyScorer& scorer, const SparseVector& features, double gold);

struct TrainResult {
  ToyScorer scorer;
  std::vector<double> epoch_loss;  // mean pre-update loss of each epoch
};

// Plain SGD on squared error with a seeded per-epoch shuffle. The bias starts
// at the mean gold score.
TrainResult train(const Dataset& dataset, std::size_t epochs, double learning_rate, std::uint64_t seed,
                  const Config& config = {});

enum class Keep { top, bottom };

Dataset filter_fraction(const Dataset& dataset, const Direction& direction, Keep keep, double fraction);

double mean_prediction(const ToyScorer& scorer, std::span<const SynthExample> examples);

struct DistributionReport {
  std::vector<std::string> rows;
  std::vector<Direction> columns;
  std::vector<std::vector<double>> mean_scores;  // rows x columns
};

DistributionReport distribution_bias_experiment(std::uint64_t seed, const Config& config = {});

struct TagReport {
  std::vector<std::string> tags;
  std::vector<std::optional<double>> train_mean;  // empty for tags unseen in training
  std::vector<double> mean_prediction;
};

// Throws Error if two of `tags` share a feature index.
void check_tag_collisions(std::span<const std::string> tags, const Config& config);

TagReport tag_bias_experiment(std::uint64_t seed, const Config& config = {});

struct DistributionPattern {
  std::size_t seeds = 0;
  std::size_t top_raises_a = 0;
  std::size_t bottom_lowers_a = 0;
  double mean_shift_a_top = 0.0;  // mean over seeds of |top(A) - all| on A
  double mean_shift_b_top = 0.0;  // same filter, measured on B
  double mean_shift_a_bottom = 0.0;
  double mean_shift_b_bottom = 0.0;

  bool holds() const;
};

DistributionPattern check_distribution_pattern(std::span<const DistributionReport> reports);

struct TagPattern {
  std::size_t seeds = 0;
  std::size_t monotone_seen = 0;  // seeds with 2019 <= 2020 <= 2021
  double mean_2019 = 0.0;
  double best_unseen_after = 0.0;  // best seed-averaged unseen tag after the training years
  std::string best_unseen_tag;
  double max_tag_spread = 0.0;  // seed-averaged max - min over test tags

  bool holds() const;
};

TagPattern check_tag_pattern(std::span<const TagReport> reports, const Config& config = {});

std::string render_distribution_tsv(const DistributionReport& report);
std::string render_tag_tsv(const TagReport& report);

}  // namespace cometkit::biaslab
