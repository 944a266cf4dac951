#include "emtk/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "emtk/error.hpp"
#include "emtk/rng.hpp"

namespace emtk {

void ForestConfig::validate(std::size_t feature_dim) const {
  if (n_trees == 0 || max_depth == 0 || min_samples_leaf == 0) {
    throw Error(ErrorCode::InvalidConfig, "forest n_trees, max_depth and min_samples_leaf must be positive");
  }
  if (max_features > feature_dim) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("max_features {} exceeds feature dimension {}", max_features, feature_dim));
  }
}

std::size_t ForestConfig::resolved_max_features(std::size_t feature_dim) const {
  if (max_features > 0) return max_features;
  return std::max<std::size_t>(1, (feature_dim + 2) / 3);
}

nlohmann::json ForestConfig::to_json() const {
  return {{"n_trees", n_trees},         {"max_depth", max_depth}, {"min_samples_leaf", min_samples_leaf},
          {"max_features", max_features}, {"bootstrap", bootstrap}, {"seed", seed}};
}

ForestConfig ForestConfig::from_json(const nlohmann::json& j) {
  ForestConfig c;
  j.at("n_trees").get_to(c.n_trees);
  j.at("max_depth").get_to(c.max_depth);
  j.at("min_samples_leaf").get_to(c.min_samples_leaf);
  j.at("max_features").get_to(c.max_features);
  j.at("bootstrap").get_to(c.bootstrap);
  j.at("seed").get_to(c.seed);
  return c;
}

namespace {

// Reductions closer than this (relative) count as ties so the tie rule is not
// at the mercy of summation order.
bool clearly_greater(double a, double b) { return a > b + 1e-9 * (1.0 + std::abs(b)); }

double mean_of(std::span<const double> y, std::span<const std::size_t> samples) {
  double s = 0.0;
  for (std::size_t i : samples) s += y[i];
  return s / static_cast<double>(samples.size());
}

}  // namespace

std::optional<Split> best_split(const Matrix& x, std::span<const double> y, std::span<const std::size_t> samples,
                                std::span<const std::size_t> features, std::size_t min_samples_leaf) {
  const std::size_t n = samples.size();
  if (n < 2) return std::nullopt;
  const double mu = mean_of(y, samples);
  double total_sse = 0.0;
  for (std::size_t i : samples) total_sse += (y[i] - mu) * (y[i] - mu);

  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());

  std::optional<Split> best;
  std::vector<std::size_t> order(samples.begin(), samples.end());
  for (std::size_t f : sorted_features) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    // Centered sums keep the SSE arithmetic well conditioned.
    double left_sum = 0.0;
    double left_sq = 0.0;
    double right_sum = 0.0;
    double right_sq = 0.0;
    for (std::size_t i : order) {
      const double d = y[i] - mu;
      right_sum += d;
      right_sq += d * d;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const double d = y[order[p]] - mu;
      left_sum += d;
      left_sq += d * d;
      right_sum -= d;
      right_sq -= d * d;
      const double xv = x(order[p], f);
      const double xn = x(order[p + 1], f);
      if (!(xv < xn)) continue;
      const std::size_t nl = p + 1;
      const std::size_t nr = n - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
      const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
      const double reduction = total_sse - sse_l - sse_r;
      if (!best ? reduction > 0.0 : clearly_greater(reduction, best->sse_reduction)) {
        // Adjacent doubles can round the midpoint up to xn, which would empty the right side.
        const double mid = xv + (xn - xv) / 2.0;
        best = Split{f, mid < xn ? mid : xv, reduction};
      }
    }
  }
  if (best && !(best->sse_reduction > 1e-12 * (1.0 + total_sse))) return std::nullopt;
  return best;
}

double DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  return nodes_[i].value;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

double RandomForest::predict(std::span<const double> x) const {
  if (x.size() != feature_dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("forest expects {} features, got {}", feature_dim_, x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const ForestConfig& config, SplitMix64& rng)
      : x_(x), y_(y), config_(config), rng_(rng), n_features_(config.resolved_max_features(x.cols())) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    grow(std::move(samples), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  std::size_t grow(std::vector<std::size_t> samples, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({});
    nodes_[id].value = mean_of(y_, samples);
    if (depth >= config_.max_depth || samples.size() < 2 * config_.min_samples_leaf) return id;
    const auto split = best_split(x_, y_, samples, candidates(), config_.min_samples_leaf);
    if (!split) return id;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : samples) (x_(i, split->feature) <= split->threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();
    const std::size_t l = grow(std::move(left), depth + 1);
    const std::size_t r = grow(std::move(right), depth + 1);
    nodes_[id].feature = static_cast<int>(split->feature);
    nodes_[id].threshold = split->threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Partial Fisher-Yates draw of n_features_ indices, returned sorted.
  std::vector<std::size_t> candidates() {
    std::vector<std::size_t> all(x_.cols());
    std::iota(all.begin(), all.end(), 0);
    if (n_features_ >= all.size()) return all;
    for (std::size_t i = 0; i < n_features_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(n_features_);
    std::sort(all.begin(), all.end());
    return all;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const ForestConfig& config_;
  SplitMix64& rng_;
  std::size_t n_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RandomForest fit_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyData, "cannot fit a forest on no samples");
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("{} feature rows vs {} targets", x.rows(), y.size()));
  }
  config.validate(x.cols());
  std::vector<DecisionTree> trees;
  trees.reserve(config.n_trees);
  const std::size_t n = x.rows();
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    SplitMix64 rng(derive_seed(config.seed, t));
    std::vector<std::size_t> samples(n);
    if (config.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.below(n));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    trees.push_back(TreeBuilder(x, y, config, rng).build(std::move(samples)));
  }
  return RandomForest(config, x.cols(), std::move(trees));
}

}  // namespace emtk
