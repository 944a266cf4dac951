#include "emtk/train.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <span>

#include "emtk/error.hpp"
#include "emtk/rng.hpp"

namespace emtk {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  }
  if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch_size must be positive");
  if (max_epochs == 0) throw Error(ErrorCode::InvalidConfig, "max_epochs must be positive");
  if (patience > max_epochs) throw Error(ErrorCode::InvalidConfig, "patience must not exceed max_epochs");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam moments out of range");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size}, {"max_epochs", max_epochs},
          {"patience", patience},           {"beta1", beta1},           {"beta2", beta2},
          {"epsilon", epsilon},             {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("batch_size").get_to(c.batch_size);
  j.at("max_epochs").get_to(c.max_epochs);
  j.at("patience").get_to(c.patience);
  j.at("beta1").get_to(c.beta1);
  j.at("beta2").get_to(c.beta2);
  j.at("epsilon").get_to(c.epsilon);
  j.at("seed").get_to(c.seed);
  return c;
}

namespace {

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  std::size_t step = 0;

  explicit AdamState(const MTNet& net) {
    for (const auto& l : net.layers()) {
      m_w.emplace_back(l.weights.size(), 0.0);
      v_w.emplace_back(l.weights.size(), 0.0);
      m_b.emplace_back(l.bias.size(), 0.0);
      v_b.emplace_back(l.bias.size(), 0.0);
    }
  }

  void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m, std::vector<double>& v,
              const TrainConfig& c, double c1, double c2) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      p[k] -= c.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + c.epsilon);
    }
  }

  void apply(MTNet& net, const Gradients& g, const TrainConfig& c) {
    ++step;
    const double c1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weights, g.weights[l], m_w[l], v_w[l], c, c1, c2);
      update(layers[l].bias, g.bias[l], m_b[l], v_b[l], c, c1, c2);
    }
  }
};

}  // namespace

TrainResult train(MTNet net, const SampleTable& train_set, const SampleTable* val_set, const TrainConfig& config) {
  config.validate();
  if (train_set.size() == 0) throw Error(ErrorCode::EmptyData, "training set is empty");
  const bool validate = val_set != nullptr && val_set->size() > 0;

  TrainResult result;
  AdamState adam(net);
  SplitMix64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  MTNet best_net = net;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto g = gradients(net, train_set, std::span<const std::size_t>(order.data() + start, end - start));
      adam.apply(net, g, config);
    }
    const double tl = loss(net, train_set);
    if (!std::isfinite(tl)) {
      throw Error(ErrorCode::NonFiniteLoss, fmt::format("training loss became non-finite at epoch {}", epoch));
    }
    result.train_loss.push_back(tl);
    result.epochs_run = epoch;
    if (!validate) continue;
    const double vl = mse(net, *val_set);
    if (!std::isfinite(vl)) {
      throw Error(ErrorCode::NonFiniteLoss, fmt::format("validation loss became non-finite at epoch {}", epoch));
    }
    result.val_mse.push_back(vl);
    if (vl < best) {
      best = vl;
      best_net = net;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best > config.patience) {
      break;
    }
  }
  if (validate) {
    result.net = std::move(best_net);
  } else {
    result.net = std::move(net);
    result.best_epoch = result.epochs_run;
  }
  return result;
}

}  // namespace emtk
