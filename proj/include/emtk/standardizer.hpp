#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/registry.hpp"
#include "emtk/samples.hpp"

namespace emtk {

// Per-feature and per-channel z-scoring fitted on training data only.
// Standard deviations are population (1/n) estimates. A zero-variance
// feature is flagged constant and gets scale 1, so it maps to 0 after
// centering. Channels with fewer than two distinct training targets also get
// scale 1; channels absent from training get mean 0.
class Standardizer {
 public:
  Standardizer() = default;

  static Standardizer fit(const SampleTable& train);

  std::size_t feature_dim() const noexcept { return feature_mean_.size(); }
  std::size_t channel_count() const noexcept { return target_mean_.size(); }
  const std::vector<double>& feature_mean() const noexcept { return feature_mean_; }
  const std::vector<double>& feature_scale() const noexcept { return feature_scale_; }
  const std::vector<bool>& feature_constant() const noexcept { return feature_constant_; }
  const std::vector<double>& target_mean() const noexcept { return target_mean_; }
  const std::vector<double>& target_scale() const noexcept { return target_scale_; }

  // Throws DimensionMismatch.
  std::vector<double> apply_features(std::span<const double> row) const;
  // Model-scale target -> z-score.
  double apply_target(std::size_t channel, double transformed) const;
  // z-score -> model scale (log10 units for log channels).
  double destandardize(std::size_t channel, double z) const;
  // z-score -> raw channel units.
  double invert_target(std::size_t channel, double z, const PropertyRegistry& registry) const;

  // Features and targets of every row standardized.
  SampleTable apply(const SampleTable& table) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

  bool operator==(const Standardizer&) const = default;

 private:
  std::vector<double> feature_mean_;
  std::vector<double> feature_scale_;
  std::vector<bool> feature_constant_;
  std::vector<double> target_mean_;
  std::vector<double> target_scale_;
};

}  // namespace emtk
