#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "cometkit/biaslab.hpp"
#include "cometkit/error.hpp"

using namespace cometkit;
using namespace cometkit::biaslab;

namespace {

const DirectionPrior kHiBn{Direction{"hi", "bn"}, 0.910};
const DirectionPrior kEnGu{Direction{"en", "gu"}, 0.514};

double mean_gold(const Dataset& d, const Direction& dir) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& e : d) {
    if (e.direction == dir) {
      sum += e.gold_da;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

std::set<std::uint32_t> active(const SparseVector& v) {
  std::set<std::uint32_t> s;
  for (const auto& [i, x] : v) s.insert(i);
  return s;
}

}  // namespace

TEST(Synth, Deterministic) {
  const DirectionPrior priors[] = {kHiBn, kEnGu};
  EXPECT_EQ(generate_synth(priors, 50, 42), generate_synth(priors, 50, 42));
  EXPECT_NE(generate_synth(priors, 50, 42), generate_synth(priors, 50, 43));
}

TEST(Synth, PriorsSeparateDirections) {
  const DirectionPrior priors[] = {kHiBn, kEnGu};
  const auto d = generate_synth(priors, 4000, 1);
  EXPECT_NEAR(mean_gold(d, kHiBn.direction) - mean_gold(d, kEnGu.direction), 0.396, 0.02);
  for (const auto& e : d) {
    EXPECT_GE(e.gold_da, 0.0);
    EXPECT_LE(e.gold_da, 1.0);
  }
}

TEST(Synth, ZeroCorruptionCopiesReference) {
  Config cfg;
  cfg.noise_scale = 0.0;
  const DirectionPrior priors[] = {kEnGu};
  for (const auto& e : generate_synth(priors, 100, 3, cfg)) EXPECT_EQ(e.hypothesis, e.reference);
}

TEST(Synth, CorruptionTracksQuality) {
  const DirectionPrior priors[] = {kEnGu};
  double diff_hi = 0, diff_lo = 0;
  std::size_t n_hi = 0, n_lo = 0;
  for (const auto& e : generate_synth(priors, 2000, 4)) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < std::min(e.hypothesis.size(), e.reference.size()); ++i) same += e.hypothesis[i] == e.reference[i];
    const double frac = static_cast<double>(same) / static_cast<double>(e.reference.size());
    (e.quality > 0.9 ? diff_hi : diff_lo) += frac;
    (e.quality > 0.9 ? n_hi : n_lo) += 1;
  }
  EXPECT_GT(diff_hi / n_hi, diff_lo / n_lo);
}

TEST(Synth, InvalidPrior) {
  const DirectionPrior bad[] = {{Direction{"en", "de"}, 1.5}};
  EXPECT_THROW(generate_synth(bad, 10, 1), Error);
}

TEST(Featurize, EmptyStringsKeepDirectionAndTag) {
  SynthExample e{Direction{"en", "de"}, "", "", "", std::nullopt, 0.5, 0.5};
  EXPECT_EQ(featurize(e).size(), 1u);
  e.tag = "2019";
  EXPECT_EQ(featurize(e).size(), 2u);
}

TEST(Featurize, IdenticalExamplesIdenticalVectors) {
  const DirectionPrior priors[] = {kEnGu};
  const auto d = generate_synth(priors, 5, 9);
  for (const auto& e : d) EXPECT_EQ(featurize(e), featurize(SynthExample(e)));
}

TEST(Featurize, TagChangeMovesExactlyOneFeature) {
  const DirectionPrior priors[] = {kEnGu};
  auto d = generate_synth(priors, 20, 10);
  for (auto& e : d) {
    e.tag = "2019";
    const auto a = active(featurize(e));
    e.tag = "2024";
    const auto b = active(featurize(e));
    std::vector<std::uint32_t> only_a, only_b;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
    EXPECT_EQ(only_a.size(), 1u);
    EXPECT_EQ(only_b.size(), 1u);
  }
}

TEST(Featurize, IndicesInRange) {
  Config cfg;
  cfg.dim_log2 = 10;
  const DirectionPrior priors[] = {kHiBn};
  for (const auto& e : generate_synth(priors, 20, 2, cfg)) {
    for (const auto& [i, v] : featurize(e, cfg)) {
      EXPECT_LT(i, 1u << 10);
      EXPECT_GT(v, 0.0);
    }
  }
}

TEST(TagCollisions, DefaultTagsAreDistinct) {
  std::vector<std::string> tags;
  for (int y = 2018; y <= 2025; ++y) tags.push_back(std::to_string(y));
  EXPECT_NO_THROW(check_tag_collisions(tags, Config{}));
  Config tiny;
  tiny.dim_log2 = 1;
  EXPECT_THROW(check_tag_collisions(tags, tiny), Error);
}

TEST(Train, MemorisesOneExample) {
  const DirectionPrior priors[] = {kEnGu};
  const auto d = generate_synth(priors, 1, 5);
  const auto r = train(d, 200, 0.002, 1);
  EXPECT_NEAR(r.scorer.predict(d[0]), d[0].gold_da, 1e-3);
}

TEST(Train, MemorisesWithBiasAway) {
  // start the bias far from the target so the weights have to move
  const DirectionPrior priors[] = {kEnGu};
  auto d = generate_synth(priors, 2, 6);
  d[0].gold_da = 0.1;
  d[1].gold_da = 0.9;
  const auto r = train(d, 400, 0.002, 1);
  EXPECT_NEAR(r.scorer.predict(d[0]), 0.1, 1e-3);
  EXPECT_NEAR(r.scorer.predict(d[1]), 0.9, 1e-3);
}

TEST(Train, LossFiniteAndRecorded) {
  const DirectionPrior priors[] = {kEnGu, kHiBn};
  const auto r = train(generate_synth(priors, 200, 7), 6, 0.0005, 3);
  ASSERT_EQ(r.epoch_loss.size(), 6u);
  for (double l : r.epoch_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Train, BitIdenticalRuns) {
  const DirectionPrior priors[] = {kEnGu, kHiBn};
  const auto d = generate_synth(priors, 300, 8);
  const auto a = train(d, 3, 0.0005, 11);
  const auto b = train(d, 3, 0.0005, 11);
  EXPECT_EQ(a.scorer.weights, b.scorer.weights);
  EXPECT_EQ(a.scorer.bias, b.scorer.bias);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_NE(train(d, 3, 0.0005, 12).scorer.weights, a.scorer.weights);
}

TEST(Train, EmptyDataset) { EXPECT_THROW(train({}, 1, 0.001, 1), Error); }

TEST(Predict, LinearInFeatures) {
  const DirectionPrior priors[] = {kEnGu};
  const auto d = generate_synth(priors, 100, 12);
  const auto s = train(d, 2, 0.0005, 1).scorer;
  for (const auto& e : d) {
    auto x = featurize(e);
    const double base = s.dot(x);
    for (auto& [i, v] : x) v *= 2.5;
    EXPECT_NEAR(s.dot(x), 2.5 * base, 1e-12 * (1 + std::abs(base)));
    EXPECT_TRUE(std::isfinite(s.predict(e)));
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(123);
  const DirectionPrior priors[] = {kEnGu, kHiBn};
  const auto d = generate_synth(priors, 10, 13);
  ToyScorer s = train(d, 1, 0.0005, 1).scorer;
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& w : s.weights) w += noise(rng);
  for (const auto& e : d) {
    const auto x = featurize(e);
    const auto g = example_gradient(s, x, e.gold_da);
    for (int k = 0; k < 10; ++k) {
      const auto [idx, value] = x[rng() % x.size()];
      const double h = 1e-5;
      ToyScorer plus = s, minus = s;
      plus.weights[idx] += h;
      minus.weights[idx] -= h;
      const double fd = (example_loss(plus, x, e.gold_da) - example_loss(minus, x, e.gold_da)) / (2 * h);
      double analytic = 0;
      for (const auto& [j, gj] : g.weights) {
        if (j == idx) analytic = gj;
      }
      EXPECT_LT(std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-12), 1e-4);
    }
  }
}

TEST(Filter, Examples) {
  const DirectionPrior priors[] = {kEnGu, kHiBn};
  const auto d = generate_synth(priors, 100, 14);
  EXPECT_EQ(filter_fraction(d, kEnGu.direction, Keep::top, 1.0), d);
  const auto top = filter_fraction(d, kEnGu.direction, Keep::top, 0.75);
  const auto bottom = filter_fraction(d, kEnGu.direction, Keep::bottom, 0.75);
  EXPECT_EQ(top.size(), 175u);
  EXPECT_EQ(bottom.size(), 175u);
  std::vector<double> golds;
  for (const auto& e : d) {
    if (e.direction == kEnGu.direction) golds.push_back(e.gold_da);
  }
  std::sort(golds.begin(), golds.end());
  for (const auto& e : top) {
    if (e.direction == kEnGu.direction) EXPECT_GE(e.gold_da, golds[25]);
  }
  EXPECT_GT(mean_gold(top, kEnGu.direction), mean_gold(d, kEnGu.direction));
  EXPECT_GT(mean_gold(d, kEnGu.direction), mean_gold(bottom, kEnGu.direction));
  EXPECT_EQ(mean_gold(top, kHiBn.direction), mean_gold(d, kHiBn.direction));
  EXPECT_THROW(filter_fraction(d, Direction{"fr", "de"}, Keep::top, 0.5), Error);
  EXPECT_THROW(filter_fraction(d, kEnGu.direction, Keep::top, 0.0), Error);
  EXPECT_THROW(filter_fraction(d, kEnGu.direction, Keep::top, 1.5), Error);
}

TEST(Experiments, Shapes) {
  Config small;
  small.train_per_direction = 200;
  small.test_per_direction = 50;
  small.epochs = 2;
  const auto dist = distribution_bias_experiment(1, small);
  ASSERT_EQ(dist.rows.size(), 5u);
  ASSERT_EQ(dist.columns.size(), 2u);
  for (const auto& row : dist.mean_scores) EXPECT_EQ(row.size(), 2u);
  const auto tags = tag_bias_experiment(1, small);
  ASSERT_EQ(tags.tags.size(), 8u);
  EXPECT_EQ(tags.tags.front(), "2018");
  EXPECT_EQ(tags.tags.back(), "2025");
  EXPECT_FALSE(tags.train_mean[0]);
  EXPECT_TRUE(tags.train_mean[1]);
  EXPECT_NE(render_distribution_tsv(dist).find("all\t"), std::string::npos);
}

TEST(Experiments, TagChangeShiftsMeanPrediction) {
  Config small;
  small.train_per_direction = 300;
  small.test_per_direction = 50;
  const auto r = tag_bias_experiment(2, small);
  EXPECT_NE(r.mean_prediction[1], r.mean_prediction[3]);
}
