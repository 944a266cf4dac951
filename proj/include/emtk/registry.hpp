#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace emtk {

enum class Fidelity { Exp, Calc };
enum class Transform { None, Log10 };

std::string_view fidelity_name(Fidelity f) noexcept;
std::optional<Fidelity> fidelity_from_name(std::string_view name) noexcept;
std::string_view transform_name(Transform t) noexcept;
std::optional<Transform> transform_from_name(std::string_view name) noexcept;

// det_velocity, det_pressure, heat_detonation, gurney_energy, impact_h50,
// impact_e50, heat_form_crystal, heat_sublimation, heat_form_gas.
const std::vector<std::string>& property_tokens();

struct PropertyChannel {
  std::string property;
  Fidelity fidelity = Fidelity::Exp;
  std::string unit;
  Transform transform = Transform::None;

  // "property:fidelity", e.g. "impact_h50:exp".
  std::string name() const;
  double forward(double value) const;  // raw -> model scale
  double inverse(double value) const;  // model scale -> raw
};

// Ordered channel list. The order fixes selector indices, so it is
// persisted with every trained model.
class PropertyRegistry {
 public:
  PropertyRegistry() = default;
  explicit PropertyRegistry(std::vector<PropertyChannel> channels);

  const std::vector<PropertyChannel>& channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return channels_.size(); }
  const PropertyChannel& at(std::size_t index) const { return channels_.at(index); }

  // Throws UnknownChannel.
  std::size_t index_of(std::string_view property, Fidelity fidelity) const;
  std::size_t index_of(std::string_view channel_name) const;
  std::optional<std::size_t> find(std::string_view property, Fidelity fidelity) const;

  nlohmann::json to_json() const;
  static PropertyRegistry from_json(const nlohmann::json& j);
  static PropertyRegistry load(const std::string& path);

  bool operator==(const PropertyRegistry& other) const;

 private:
  std::vector<PropertyChannel> channels_;
};

// Twelve channels: detonation, sensitivity and thermochemical properties.
PropertyRegistry default_registry();

// One-hot selector of length registry.size(). Throws UnknownChannel.
std::vector<double> selector_onehot(std::size_t channel, const PropertyRegistry& registry);
std::vector<double> selector_onehot(std::string_view channel_name, const PropertyRegistry& registry);

}  // namespace emtk
