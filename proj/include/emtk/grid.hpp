#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/forest.hpp"
#include "emtk/samples.hpp"
#include "emtk/train.hpp"

namespace emtk {

// Where the selector enters: a 1-based hidden layer, or relative to the end.
struct SelectorPosition {
  enum class Kind { Index, Last, SecondToLast };
  Kind kind = Kind::Last;
  std::size_t index = 0;

  // nullopt when the position does not exist for this depth.
  std::optional<std::size_t> resolve(std::size_t hidden_layers) const;
  nlohmann::json to_json() const;
  static SelectorPosition from_json(const nlohmann::json& j);
  bool operator==(const SelectorPosition&) const = default;
};

struct NnCell {
  std::vector<std::size_t> hidden_sizes;
  std::size_t selector_layer_index = 1;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double l2_penalty = 0.0;

  nlohmann::json to_json() const;
  bool operator==(const NnCell&) const = default;
};

struct NnGrid {
  std::vector<std::vector<std::size_t>> hidden_sizes{{64, 32}};
  std::vector<SelectorPosition> selector_positions{{SelectorPosition::Kind::Last, 0},
                                                   {SelectorPosition::Kind::SecondToLast, 0}};
  std::vector<double> learning_rates{1e-3};
  std::vector<std::size_t> batch_sizes{32};
  std::vector<double> l2_penalties{1e-4};
  std::size_t max_epochs = 300;
  std::size_t patience = 30;

  // Cartesian product, first axis outermost. Selector positions that do not
  // exist for a depth are skipped; single-task grids ignore the selector axis.
  // Throws InvalidConfig when no cell remains.
  std::vector<NnCell> cells(bool multitask) const;
  nlohmann::json to_json() const;
  static NnGrid from_json(const nlohmann::json& j);
};

struct ForestCell {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;

  nlohmann::json to_json() const;
  bool operator==(const ForestCell&) const = default;
};

struct ForestGrid {
  std::vector<std::size_t> n_trees{100};
  std::vector<std::size_t> max_depth{12};
  std::vector<std::size_t> min_samples_leaf{1, 3};
  std::vector<std::size_t> max_features{0};  // 0 means ceil(d / 3)

  std::vector<ForestCell> cells() const;
  nlohmann::json to_json() const;
  static ForestGrid from_json(const nlohmann::json& j);
};

// Grid file: {"mtnn": {...}, "forest": {...}}; either part may be omitted.
struct GridFile {
  NnGrid nn;
  ForestGrid forest;

  nlohmann::json to_json() const;
  static GridFile from_json(const nlohmann::json& j);
  static GridFile load(const std::string& path);
};

struct NnSearchResult {
  std::vector<NnCell> cells;
  std::vector<double> scores;  // mean inner-validation RMSE, standardized units
  std::vector<double> mean_best_epoch;
  std::size_t best = 0;
  std::size_t refit_epochs = 0;  // round(mean best epoch) of the winner
};

struct ForestSearchResult {
  std::vector<ForestCell> cells;
  std::vector<double> scores;  // mean inner-validation RMSE, model-scale units
  std::size_t best = 0;
};

// Inner material-level k-fold CV for every cell. The standardizer is fitted
// on each inner training portion. A cell's score is the mean over folds of
// the validation RMSE per channel (standardized units) averaged over the
// channels present. Lowest score wins; ties go to the earlier cell. Cell c
// seeds its nets from derive_seed(seed, c); every cell sees the same folds.
NnSearchResult grid_search(const NnGrid& grid, const SampleTable& data, bool multitask, std::size_t inner_k,
                           std::uint64_t seed, std::size_t jobs = 1);

// The same harness for single-channel forests trained on model-scale targets.
ForestSearchResult grid_search_forest(const ForestGrid& grid, const SampleTable& data, std::size_t inner_k,
                                      std::uint64_t seed, std::size_t jobs = 1);

// Network config for a cell on the given data shape.
MTNetConfig network_config(const NnCell& cell, std::size_t input_dim, std::size_t selector_dim, std::uint64_t seed);
TrainConfig train_config(const NnCell& cell, std::size_t max_epochs, std::size_t patience, std::uint64_t seed);
ForestConfig forest_config(const ForestCell& cell, std::uint64_t seed);

}  // namespace emtk
