#include "emtk/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>

#include "emtk/error.hpp"

namespace emtk {

std::string_view fidelity_name(Fidelity f) noexcept { return f == Fidelity::Exp ? "exp" : "calc"; }

std::optional<Fidelity> fidelity_from_name(std::string_view name) noexcept {
  if (name == "exp") return Fidelity::Exp;
  if (name == "calc") return Fidelity::Calc;
  return std::nullopt;
}

std::string_view transform_name(Transform t) noexcept { return t == Transform::None ? "none" : "log10"; }

std::optional<Transform> transform_from_name(std::string_view name) noexcept {
  if (name == "none") return Transform::None;
  if (name == "log10") return Transform::Log10;
  return std::nullopt;
}

const std::vector<std::string>& property_tokens() {
  static const std::vector<std::string> tokens = {
      "det_velocity",      "det_pressure",     "heat_detonation",
      "gurney_energy",     "impact_h50",       "impact_e50",
      "heat_form_crystal", "heat_sublimation", "heat_form_gas"};
  return tokens;
}

std::string PropertyChannel::name() const { return fmt::format("{}:{}", property, fidelity_name(fidelity)); }

double PropertyChannel::forward(double value) const {
  return transform == Transform::Log10 ? std::log10(value) : value;
}

double PropertyChannel::inverse(double value) const {
  return transform == Transform::Log10 ? std::pow(10.0, value) : value;
}

PropertyRegistry::PropertyRegistry(std::vector<PropertyChannel> channels) : channels_(std::move(channels)) {
  std::set<std::string> seen;
  for (const auto& c : channels_) {
    const auto& tokens = property_tokens();
    if (std::find(tokens.begin(), tokens.end(), c.property) == tokens.end()) {
      throw Error(ErrorCode::InvalidRegistry, fmt::format("unknown property token '{}'", c.property));
    }
    if (!seen.insert(c.name()).second) {
      throw Error(ErrorCode::InvalidRegistry, fmt::format("duplicate channel '{}'", c.name()));
    }
    if (c.property == "impact_h50" && c.transform != Transform::Log10) {
      throw Error(ErrorCode::InvalidRegistry, "impact_h50 channels must use the log10 transform");
    }
  }
}

std::optional<std::size_t> PropertyRegistry::find(std::string_view property, Fidelity fidelity) const {
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (channels_[i].property == property && channels_[i].fidelity == fidelity) return i;
  }
  return std::nullopt;
}

std::size_t PropertyRegistry::index_of(std::string_view property, Fidelity fidelity) const {
  if (auto i = find(property, fidelity)) return *i;
  throw Error(ErrorCode::UnknownChannel,
              fmt::format("channel '{}:{}' is not in the registry", property, fidelity_name(fidelity)));
}

std::size_t PropertyRegistry::index_of(std::string_view channel_name) const {
  const auto colon = channel_name.rfind(':');
  if (colon != std::string_view::npos) {
    if (auto f = fidelity_from_name(channel_name.substr(colon + 1))) {
      return index_of(channel_name.substr(0, colon), *f);
    }
  }
  throw Error(ErrorCode::UnknownChannel, fmt::format("channel '{}' is not in the registry", channel_name));
}

nlohmann::json PropertyRegistry::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : channels_) {
    j.push_back({{"property", c.property},
                 {"fidelity", fidelity_name(c.fidelity)},
                 {"unit", c.unit},
                 {"transform", transform_name(c.transform)}});
  }
  return j;
}

PropertyRegistry PropertyRegistry::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidRegistry, "registry must be a JSON list");
  std::vector<PropertyChannel> channels;
  try {
    for (const auto& entry : j) {
      PropertyChannel c;
      c.property = entry.at("property").get<std::string>();
      const auto f = fidelity_from_name(entry.at("fidelity").get<std::string>());
      if (!f) throw Error(ErrorCode::InvalidRegistry, "fidelity must be 'exp' or 'calc'");
      c.fidelity = *f;
      c.unit = entry.value("unit", "");
      const auto t = transform_from_name(entry.value("transform", "none"));
      if (!t) throw Error(ErrorCode::InvalidRegistry, "transform must be 'none' or 'log10'");
      c.transform = *t;
      channels.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidRegistry, fmt::format("malformed registry: {}", e.what()));
  }
  return PropertyRegistry(std::move(channels));
}

PropertyRegistry PropertyRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open registry '{}'", path));
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidRegistry, fmt::format("registry '{}' is not JSON: {}", path, e.what()));
  }
}

bool PropertyRegistry::operator==(const PropertyRegistry& other) const {
  if (channels_.size() != other.channels_.size()) return false;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& a = channels_[i];
    const auto& b = other.channels_[i];
    if (a.property != b.property || a.fidelity != b.fidelity || a.unit != b.unit ||
        a.transform != b.transform) {
      return false;
    }
  }
  return true;
}

PropertyRegistry default_registry() {
  using F = Fidelity;
  using T = Transform;
  return PropertyRegistry({
      {"det_velocity", F::Exp, "km/s", T::None},
      {"det_velocity", F::Calc, "km/s", T::None},
      {"det_pressure", F::Exp, "GPa", T::None},
      {"det_pressure", F::Calc, "GPa", T::None},
      {"heat_detonation", F::Exp, "kJ/kg", T::None},
      {"heat_detonation", F::Calc, "kJ/kg", T::None},
      {"gurney_energy", F::Calc, "kJ/kg", T::None},
      {"impact_h50", F::Exp, "cm", T::Log10},
      {"impact_e50", F::Exp, "J", T::None},
      {"heat_form_crystal", F::Exp, "kJ/mol", T::None},
      {"heat_sublimation", F::Calc, "kJ/mol", T::None},
      {"heat_form_gas", F::Calc, "kJ/mol", T::None},
  });
}

std::vector<double> selector_onehot(std::size_t channel, const PropertyRegistry& registry) {
  if (channel >= registry.size()) {
    throw Error(ErrorCode::UnknownChannel, fmt::format("selector index {} out of range", channel));
  }
  std::vector<double> v(registry.size(), 0.0);
  v[channel] = 1.0;
  return v;
}

std::vector<double> selector_onehot(std::string_view channel_name, const PropertyRegistry& registry) {
  return selector_onehot(registry.index_of(channel_name), registry);
}

}  // namespace emtk
