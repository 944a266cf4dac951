#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emtk/dataset.hpp"

namespace emtk {

// Material-level k-fold partition. All records of one material share a fold.
struct SplitPlan {
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::map<std::string, std::size_t> assignment;

  // Throws InvalidArgument for an unknown material.
  std::size_t fold_of(const std::string& material_id) const;
  // Sorted ids.
  std::vector<std::string> test_materials(std::size_t fold) const;
  std::vector<std::string> train_materials(std::size_t fold) const;

  bool operator==(const SplitPlan&) const = default;
};

// Sorts the unique ids, shuffles them with Fisher-Yates driven by
// SplitMix64(seed) and deals them round-robin: position p goes to fold p % k.
// Throws InvalidArgument for k < 2 and TooFewMaterials when fewer than k
// distinct ids are given.
SplitPlan kfold_by_material(std::vector<std::string> material_ids, std::size_t k, std::uint64_t seed);
SplitPlan kfold_by_material(const Dataset& dataset, std::size_t k, std::uint64_t seed);

}  // namespace emtk
