#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/mtnn.hpp"

namespace emtk {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 300;
  std::size_t patience = 30;  // epochs without validation improvement
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  // Throws InvalidConfig.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  MTNet net;
  std::vector<double> train_loss;  // loss() on the training set after each epoch
  std::vector<double> val_mse;     // empty without a validation set
  std::size_t best_epoch = 0;      // 1-based
  std::size_t epochs_run = 0;
};

// Adam on shuffled minibatches (SplitMix64(config.seed) reshuffles each
// epoch). With a non-empty validation set, training stops once more than
// `patience` epochs pass without a strict improvement of validation MSE and
// the best epoch's parameters are returned. Without one, exactly max_epochs
// run and the final parameters are returned. Throws NonFiniteLoss.
TrainResult train(MTNet net, const SampleTable& train_set, const SampleTable* val_set, const TrainConfig& config);

}  // namespace emtk
