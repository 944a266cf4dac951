#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/samples.hpp"

namespace emtk {

// Feed-forward network with ReLU hidden layers and one linear output. When
// selector_dim > 0 a one-hot selector is concatenated to the input of hidden
// layer selector_layer_index (1-based). selector_dim = 0 is the single-task
// network.
struct MTNetConfig {
  std::size_t input_dim = 0;
  std::size_t selector_dim = 0;
  std::vector<std::size_t> hidden_sizes;
  std::size_t selector_layer_index = 1;
  double l2_penalty = 0.0;
  std::uint64_t seed = 0;

  // Throws InvalidConfig.
  void validate() const;
  nlohmann::json to_json() const;
  static MTNetConfig from_json(const nlohmann::json& j);
  bool operator==(const MTNetConfig&) const = default;
};

// Dense layer: out = W in + b, W row-major (out x in).
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }
  bool operator==(const Layer&) const = default;
};

class MTNet {
 public:
  MTNet() = default;
  MTNet(MTNetConfig config, std::vector<Layer> layers);

  const MTNetConfig& config() const noexcept { return config_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  // Column range of the selector inside the widened layer's weight matrix.
  std::size_t selector_layer() const noexcept { return config_.selector_layer_index - 1; }
  std::size_t selector_column_offset() const;

  // Throws DimensionMismatch. The selector must be empty iff selector_dim = 0.
  double forward(std::span<const double> features, std::span<const double> selector) const;
  // One-hot selector for `channel`; ignored for single-task nets.
  double forward_channel(std::span<const double> features, std::size_t channel) const;

  bool operator==(const MTNet&) const = default;

 private:
  MTNetConfig config_;
  std::vector<Layer> layers_;
};

// Glorot-uniform weights drawn from SplitMix64(config.seed) in layer order,
// weights row-major, zero biases. Throws InvalidConfig.
MTNet init_network(const MTNetConfig& config);

// Same shapes as the network's layers.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

// Loss over the listed rows: mean squared error plus l2 * sum of squared
// weights (biases excluded). Each sample uses the selector of its own
// channel. Empty `rows` means every row.
double loss(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows = {});
// Data term only.
double mse(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows = {});

// Analytic gradient of loss(). Throws EmptyData on an empty batch.
Gradients gradients(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows = {});

}  // namespace emtk
