#include "emtk/split.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <span>

#include "emtk/error.hpp"
#include "emtk/rng.hpp"

namespace emtk {

std::size_t SplitPlan::fold_of(const std::string& material_id) const {
  const auto it = assignment.find(material_id);
  if (it == assignment.end()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("material '{}' is not in the split", material_id));
  }
  return it->second;
}

std::vector<std::string> SplitPlan::test_materials(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignment) {
    if (f == fold) out.push_back(id);
  }
  return out;
}

std::vector<std::string> SplitPlan::train_materials(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignment) {
    if (f != fold) out.push_back(id);
  }
  return out;
}

SplitPlan kfold_by_material(std::vector<std::string> material_ids, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, fmt::format("fold count must be >= 2, got {}", k));
  std::sort(material_ids.begin(), material_ids.end());
  material_ids.erase(std::unique(material_ids.begin(), material_ids.end()), material_ids.end());
  if (material_ids.size() < k) {
    throw Error(ErrorCode::TooFewMaterials,
                fmt::format("{} materials cannot fill {} folds", material_ids.size(), k));
  }
  SplitMix64 rng(seed);
  shuffle(std::span<std::string>(material_ids), rng);
  SplitPlan plan;
  plan.seed = seed;
  plan.k = k;
  for (std::size_t p = 0; p < material_ids.size(); ++p) plan.assignment.emplace(material_ids[p], p % k);
  return plan;
}

SplitPlan kfold_by_material(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& r : dataset.records()) ids.push_back(r.material_id);
  return kfold_by_material(std::move(ids), k, seed);
}

}  // namespace emtk
