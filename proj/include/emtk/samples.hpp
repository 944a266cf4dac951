#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emtk/dataset.hpp"
#include "emtk/matrix.hpp"
#include "emtk/schema.hpp"

namespace emtk {

// One row per (material, channel) observation: a feature vector, the channel
// index and the target on the channel's model scale (after its transform).
struct SampleTable {
  Matrix x;
  std::vector<std::size_t> channel;
  std::vector<double> y;
  std::vector<std::string> material;
  std::size_t n_channels = 0;

  std::size_t size() const noexcept { return y.size(); }
  void append(std::span<const double> features, std::size_t ch, double target, std::string material_id);
  SampleTable rows(std::span<const std::size_t> indices) const;
  // Row indices whose material is (or is not) in the sorted id list.
  std::vector<std::size_t> rows_of(const std::vector<std::string>& sorted_ids, bool inside = true) const;
  std::vector<std::size_t> rows_of_channel(std::size_t ch) const;
  std::vector<std::string> materials() const;  // sorted, unique
};

struct SampleBuildResult {
  SampleTable table;
  std::size_t dropped_without_density = 0;
};

// Featurizes every record. With a density schema, records lacking a density
// are dropped and counted.
SampleBuildResult build_samples(const Dataset& dataset, const FeatureSchema& schema);

}  // namespace emtk
