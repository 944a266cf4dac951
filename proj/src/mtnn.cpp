#include "emtk/mtnn.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "emtk/error.hpp"
#include "emtk/rng.hpp"

namespace emtk {

void MTNetConfig::validate() const {
  if (input_dim == 0) throw Error(ErrorCode::InvalidConfig, "input_dim must be positive");
  if (hidden_sizes.empty()) throw Error(ErrorCode::InvalidConfig, "at least one hidden layer is required");
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw Error(ErrorCode::InvalidConfig, "hidden layer sizes must be positive");
  }
  if (selector_dim > 0 && (selector_layer_index < 1 || selector_layer_index > hidden_sizes.size())) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("selector_layer_index {} outside 1..{}", selector_layer_index, hidden_sizes.size()));
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw Error(ErrorCode::InvalidConfig, "l2_penalty must be finite and non-negative");
  }
}

nlohmann::json MTNetConfig::to_json() const {
  return {{"input_dim", input_dim},   {"selector_dim", selector_dim},
          {"hidden_sizes", hidden_sizes}, {"selector_layer_index", selector_layer_index},
          {"l2_penalty", l2_penalty}, {"seed", seed}};
}

MTNetConfig MTNetConfig::from_json(const nlohmann::json& j) {
  MTNetConfig c;
  j.at("input_dim").get_to(c.input_dim);
  j.at("selector_dim").get_to(c.selector_dim);
  j.at("hidden_sizes").get_to(c.hidden_sizes);
  j.at("selector_layer_index").get_to(c.selector_layer_index);
  j.at("l2_penalty").get_to(c.l2_penalty);
  j.at("seed").get_to(c.seed);
  return c;
}

namespace {

std::vector<Layer> layer_shapes(const MTNetConfig& c) {
  std::vector<Layer> layers;
  std::size_t in = c.input_dim;
  for (std::size_t l = 0; l < c.hidden_sizes.size(); ++l) {
    Layer layer;
    layer.in = in + (c.selector_dim > 0 && l + 1 == c.selector_layer_index ? c.selector_dim : 0);
    layer.out = c.hidden_sizes[l];
    layers.push_back(layer);
    in = layer.out;
  }
  Layer out;
  out.in = in;
  out.out = 1;
  layers.push_back(out);
  for (auto& l : layers) {
    l.weights.assign(l.in * l.out, 0.0);
    l.bias.assign(l.out, 0.0);
  }
  return layers;
}

// Forward pass keeping every layer's input and pre-activation.
struct Trace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  double output = 0.0;
};

void run(const MTNet& net, std::span<const double> x, std::span<const double> selector, Trace& t) {
  const auto& layers = net.layers();
  const auto& cfg = net.config();
  t.inputs.resize(layers.size());
  t.pre.resize(layers.size());
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (cfg.selector_dim > 0 && l + 1 == cfg.selector_layer_index) {
      h.insert(h.end(), selector.begin(), selector.end());
    }
    const Layer& layer = layers[l];
    std::vector<double> z(layer.bias);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weights.data() + o * layer.in;
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * h[i];
      z[o] += acc;
    }
    t.inputs[l] = std::move(h);
    t.pre[l] = z;
    if (l + 1 < layers.size()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    h = std::move(z);
  }
  t.output = h[0];
}

std::vector<std::size_t> all_rows(const SampleTable& data, std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> out(data.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

}  // namespace

MTNet::MTNet(MTNetConfig config, std::vector<Layer> layers) : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  const auto expected = layer_shapes(config_);
  if (expected.size() != layers_.size()) throw Error(ErrorCode::InvalidConfig, "layer count does not match config");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& e = expected[l];
    if (a.in != e.in || a.out != e.out || a.weights.size() != e.weights.size() || a.bias.size() != e.bias.size()) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("layer {} shape does not match config", l + 1));
    }
  }
}

std::size_t MTNet::selector_column_offset() const {
  return layers_[selector_layer()].in - config_.selector_dim;
}

double MTNet::forward(std::span<const double> features, std::span<const double> selector) const {
  if (features.size() != config_.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("network expects {} features, got {}", config_.input_dim, features.size()));
  }
  if (selector.size() != config_.selector_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("network expects a selector of length {}, got {}", config_.selector_dim, selector.size()));
  }
  Trace t;
  run(*this, features, selector, t);
  return t.output;
}

double MTNet::forward_channel(std::span<const double> features, std::size_t channel) const {
  std::vector<double> sel(config_.selector_dim, 0.0);
  if (config_.selector_dim > 0) {
    if (channel >= config_.selector_dim) {
      throw Error(ErrorCode::DimensionMismatch, fmt::format("channel {} outside selector", channel));
    }
    sel[channel] = 1.0;
  }
  return forward(features, sel);
}

MTNet init_network(const MTNetConfig& config) {
  config.validate();
  auto layers = layer_shapes(config);
  SplitMix64 rng(config.seed);
  for (auto& l : layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (double& w : l.weights) w = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return MTNet(config, std::move(layers));
}

double mse(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows) {
  const auto idx = all_rows(data, rows);
  if (idx.empty()) throw Error(ErrorCode::EmptyData, "mse of an empty batch");
  double sum = 0.0;
  for (std::size_t i : idx) {
    const double r = net.forward_channel(data.x.row(i), data.channel[i]) - data.y[i];
    sum += r * r;
  }
  return sum / static_cast<double>(idx.size());
}

double loss(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows) {
  double penalty = 0.0;
  for (const auto& l : net.layers()) {
    for (double w : l.weights) penalty += w * w;
  }
  return mse(net, data, rows) + net.config().l2_penalty * penalty;
}

Gradients gradients(const MTNet& net, const SampleTable& data, std::span<const std::size_t> rows) {
  const auto idx = all_rows(data, rows);
  if (idx.empty()) throw Error(ErrorCode::EmptyData, "gradients of an empty batch");
  const auto& layers = net.layers();
  const auto& cfg = net.config();
  Gradients g;
  for (const auto& l : layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  const double scale = 2.0 / static_cast<double>(idx.size());
  Trace t;
  std::vector<double> sel(cfg.selector_dim, 0.0);
  for (std::size_t i : idx) {
    std::fill(sel.begin(), sel.end(), 0.0);
    if (cfg.selector_dim > 0) sel.at(data.channel[i]) = 1.0;
    run(net, data.x.row(i), sel, t);
    std::vector<double> delta{scale * (t.output - data.y[i])};
    for (std::size_t l = layers.size(); l-- > 0;) {
      const Layer& layer = layers[l];
      const auto& in = t.inputs[l];
      for (std::size_t o = 0; o < layer.out; ++o) {
        g.bias[l][o] += delta[o];
        double* gw = g.weights[l].data() + o * layer.in;
        for (std::size_t k = 0; k < layer.in; ++k) gw[k] += delta[o] * in[k];
      }
      if (l == 0) break;
      // Only the leading columns feed back to the previous layer; selector
      // columns (if any) sit at the end of the input.
      const std::size_t prev = layers[l - 1].out;
      std::vector<double> next(prev, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t k = 0; k < prev; ++k) next[k] += w[k] * delta[o];
      }
      for (std::size_t k = 0; k < prev; ++k) {
        if (!(t.pre[l - 1][k] > 0.0)) next[k] = 0.0;
      }
      delta = std::move(next);
    }
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double l2 = 2.0 * cfg.l2_penalty;
    for (std::size_t k = 0; k < layers[l].weights.size(); ++k) g.weights[l][k] += l2 * layers[l].weights[k];
  }
  return g;
}

}  // namespace emtk
