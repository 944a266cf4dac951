#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/forest.hpp"
#include "emtk/mtnn.hpp"
#include "emtk/registry.hpp"
#include "emtk/schema.hpp"
#include "emtk/standardizer.hpp"

namespace emtk {

enum class ModelKind { Network, Forest };

inline constexpr std::uint32_t kModelFormatVersion = 1;

// A trained model with everything needed to predict from a molecule.
// Network bundles hold either one multi-task net (selector_dim equal to the
// registry size) or one single-task net per registry channel, each with its
// own standardizer. Forest bundles hold one forest per channel, trained on
// model-scale targets of raw features.
struct ModelBundle {
  ModelKind kind = ModelKind::Network;
  std::string model_id;
  FeatureSchema schema;
  PropertyRegistry registry;
  std::vector<Standardizer> standardizers;
  std::vector<MTNet> nets;
  std::vector<RandomForest> forests;
  nlohmann::json training = nlohmann::json::object();

  bool multitask() const noexcept { return kind == ModelKind::Network && nets.size() == 1 && nets[0].config().selector_dim > 0; }
  // Throws SchemaMismatch when parts disagree.
  void validate() const;
};

// Container: magic "EMMT" (networks) or "EMRF" (forests), u32 version,
// u64 FNV-1a checksum of the payload, then the payload: u64 header length,
// JSON header, little-endian f64 arrays (per net and layer: weights
// row-major, then bias; per forest node: feature, threshold, left, right,
// value). All integers little-endian.
std::string serialize_model(const ModelBundle& model);
// Throws CorruptFile (bad magic, truncation, checksum) and VersionMismatch.
ModelBundle deserialize_model(std::string_view bytes);

void save_model(const ModelBundle& model, const std::string& path);
ModelBundle load_model(const std::string& path);

struct ChannelPrediction {
  std::string channel;
  double value = 0.0;  // raw channel units
};

// One prediction per registry channel in registry order, with
// standardization and channel transforms inverted. Throws SchemaMismatch when
// the feature vector does not match the model's schema.
std::vector<ChannelPrediction> predict_matrix(const ModelBundle& model, std::span<const double> features);

}  // namespace emtk
