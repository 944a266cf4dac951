#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/matrix.hpp"

namespace emtk {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 means ceil(d / 3)
  bool bootstrap = true;         // false fits every tree on the full sample
  std::uint64_t seed = 0;

  // Throws InvalidConfig.
  void validate(std::size_t feature_dim) const;
  std::size_t resolved_max_features(std::size_t feature_dim) const;
  nlohmann::json to_json() const;
  static ForestConfig from_json(const nlohmann::json& j);
  bool operator==(const ForestConfig&) const = default;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse_reduction = 0.0;
};

// Exhaustive CART scan over midpoints of consecutive distinct values of each
// candidate feature; samples with x <= threshold go left. Returns the split
// with the largest SSE reduction; ties go to the lowest feature index, then
// the lowest threshold. Returns nullopt when nothing reduces SSE or every
// split leaves a side with fewer than min_samples_leaf samples.
std::optional<Split> best_split(const Matrix& x, std::span<const double> y, std::span<const std::size_t> samples,
                                std::span<const std::size_t> features, std::size_t min_samples_leaf = 1);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double value = 0.0;  // mean target of the node's samples

  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  double predict(std::span<const double> x) const;
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(ForestConfig config, std::size_t feature_dim, std::vector<DecisionTree> trees)
      : config_(config), feature_dim_(feature_dim), trees_(std::move(trees)) {}

  const ForestConfig& config() const noexcept { return config_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  // Mean of the per-tree leaf values. Throws DimensionMismatch.
  double predict(std::span<const double> x) const;

  bool operator==(const RandomForest&) const = default;

 private:
  ForestConfig config_;
  std::size_t feature_dim_ = 0;
  std::vector<DecisionTree> trees_;
};

// Tree t draws its bootstrap sample and per-split feature subsets from
// SplitMix64(derive_seed(seed, t)). Throws EmptyData, DimensionMismatch,
// InvalidConfig.
RandomForest fit_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config);

}  // namespace emtk
