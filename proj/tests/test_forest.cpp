#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "emtk/error.hpp"
#include "emtk/forest.hpp"
#include "support.hpp"

namespace emtk {
namespace {

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Matrix column(const std::vector<double>& values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return m;
}

TEST(BestSplit, StepFunction) {
  const auto x = column({1, 2, 3, 4});
  const std::vector<double> y{0, 0, 1, 1};
  const auto s = best_split(x, y, iota(4), iota(1));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->sse_reduction, 1.0);
}

TEST(BestSplit, NothingToGain) {
  EXPECT_FALSE(best_split(column({1, 2, 3}), std::vector<double>{5, 5, 5}, iota(3), iota(1)));
  EXPECT_FALSE(best_split(column({2, 2, 2}), std::vector<double>{1, 2, 3}, iota(3), iota(1)));
  EXPECT_FALSE(best_split(column({1}), std::vector<double>{1}, iota(1), iota(1)));
  EXPECT_FALSE(best_split(column({1, 2, 3, 4}), std::vector<double>{0, 0, 1, 1}, iota(4), iota(1), 3));
}

TEST(BestSplit, AdjacentDoublesStillSeparate) {
  const double lo = std::nextafter(1.0, 2.0);
  const double hi = std::nextafter(lo, 2.0);
  const auto x = column({lo, lo, hi, hi});
  const auto s = best_split(x, std::vector<double>{0, 0, 1, 1}, iota(4), iota(1));
  ASSERT_TRUE(s);
  EXPECT_GE(s->threshold, lo);
  EXPECT_LT(s->threshold, hi);
  ForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  const auto forest = fit_forest(x, std::vector<double>{0, 0, 1, 1}, config);
  EXPECT_DOUBLE_EQ(forest.predict(std::vector<double>{lo}), 0.0);
  EXPECT_DOUBLE_EQ(forest.predict(std::vector<double>{hi}), 1.0);
}

TEST(BestSplit, TiesGoToLowestFeature) {
  Matrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = x(i, 1) = static_cast<double>(i);
  const auto s = best_split(x, std::vector<double>{0, 0, 1, 1}, iota(4), std::vector<std::size_t>{1, 0});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
}

TEST(BestSplit, MatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto p = testing::random_split_problem(seed);
    for (std::size_t leaf : {1u, 2u}) {
      const auto got = best_split(p.x, p.y, iota(p.x.rows()), iota(p.x.cols()), leaf);
      const auto want = testing::oracle_best_split(p.x, p.y, leaf);
      ASSERT_EQ(got.has_value(), want.has_value()) << seed;
      if (!got) continue;
      EXPECT_EQ(got->feature, want->feature) << seed;
      EXPECT_EQ(got->threshold, want->threshold) << seed;
      EXPECT_NEAR(got->sse_reduction, want->reduction, 1e-9) << seed;
    }
  }
}

TEST(Forest, DepthOneStumpsMatchOracle) {
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.bootstrap = false;
  for (std::uint64_t seed = 1; seed < 60; seed += 2) {
    const auto p = testing::random_split_problem(seed);
    cfg.max_features = p.x.cols();
    const auto forest = fit_forest(p.x, p.y, cfg);
    const auto& nodes = forest.trees()[0].nodes();
    const auto want = testing::oracle_best_split(p.x, p.y);
    ASSERT_EQ(nodes[0].feature >= 0, want.has_value()) << seed;
    if (!want) continue;
    EXPECT_EQ(static_cast<std::size_t>(nodes[0].feature), want->feature);
    EXPECT_EQ(nodes[0].threshold, want->threshold);
  }
}

TEST(Forest, PredictionsStayWithinTargetRange) {
  SplitMix64 rng(4);
  Matrix x(60, 5);
  std::vector<double> y;
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t j = 0; j < 5; ++j) x(i, j) = testing::normal(rng);
    y.push_back(x(i, 0) * 2 - x(i, 3));
  }
  ForestConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 8;
  const auto forest = fit_forest(x, y, cfg);
  EXPECT_EQ(forest.trees().size(), 25u);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  for (int i = 0; i < 50; ++i) {
    std::vector<double> q(5);
    for (double& v : q) v = 3 * testing::normal(rng);
    const double p = forest.predict(q);
    EXPECT_GE(p, *lo);
    EXPECT_LE(p, *hi);
    double mean = 0.0;
    for (const auto& t : forest.trees()) mean += t.predict(q);
    EXPECT_NEAR(p, mean / 25.0, 1e-12);
  }
  for (const auto& t : forest.trees()) EXPECT_LE(t.depth(), cfg.max_depth);
  EXPECT_THROW(forest.predict(std::vector<double>(4)), Error);
}

TEST(Forest, DeterministicPerSeed) {
  const auto p = testing::random_split_problem(7);
  ForestConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 3;
  EXPECT_EQ(fit_forest(p.x, p.y, cfg), fit_forest(p.x, p.y, cfg));
  auto other = cfg;
  other.seed = 4;
  EXPECT_NE(fit_forest(p.x, p.y, cfg).trees(), fit_forest(p.x, p.y, other).trees());
}

TEST(Forest, FullDepthWithoutBootstrapInterpolates) {
  const auto p = testing::random_split_problem(9);
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 64;
  cfg.bootstrap = false;
  cfg.max_features = p.x.cols();
  const auto forest = fit_forest(p.x, p.y, cfg);
  for (std::size_t i = 0; i < p.x.rows(); ++i) EXPECT_DOUBLE_EQ(forest.predict(p.x.row(i)), p.y[i]);
}

TEST(Forest, ConfigValidation) {
  ForestConfig cfg;
  EXPECT_EQ(cfg.resolved_max_features(10), 4u);
  EXPECT_EQ(cfg.resolved_max_features(1), 1u);
  cfg.n_trees = 0;
  EXPECT_THROW(cfg.validate(3), Error);
  cfg = ForestConfig{};
  cfg.max_features = 5;
  EXPECT_THROW(cfg.validate(3), Error);
  EXPECT_EQ(ForestConfig::from_json(ForestConfig{}.to_json()), ForestConfig{});
  EXPECT_THROW(fit_forest(Matrix(), std::vector<double>{}, ForestConfig{}), Error);
  EXPECT_THROW(fit_forest(Matrix(2, 1), std::vector<double>{1.0}, ForestConfig{}), Error);
}

}  // namespace
}  // namespace emtk
