#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "emtk/molgraph.hpp"
#include "emtk/registry.hpp"

namespace emtk {

struct Record {
  std::string material_id;
  std::size_t channel = 0;  // registry index
  double value = 0.0;       // raw channel units
  std::optional<double> density;
};

struct Material {
  std::string id;
  std::string smiles;
  MolGraph graph;
};

enum class DedupePolicy { Error, Mean };

// Multi-fidelity records grouped by material. Materials are kept sorted by
// id; at most one record exists per (material, channel).
class Dataset {
 public:
  Dataset() = default;
  Dataset(PropertyRegistry registry, std::vector<Material> materials, std::vector<Record> records);

  const PropertyRegistry& registry() const noexcept { return registry_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  const std::vector<Material>& materials() const noexcept { return materials_; }

  const Material& material(const std::string& id) const;
  std::vector<std::string> material_ids() const;

  // Records per registry channel.
  std::vector<std::size_t> channel_counts() const;

  // Keeps the listed channels (in the given order) and re-indexes records.
  Dataset with_channels(const std::vector<std::size_t>& keep) const;
  Dataset without_empty_channels() const;
  // Keeps records (and materials) whose material id passes `keep`.
  template <typename Pred>
  Dataset filter_materials(Pred keep) const {
    std::vector<Material> mats;
    for (const auto& m : materials_) {
      if (keep(m.id)) mats.push_back(m);
    }
    std::vector<Record> recs;
    for (const auto& r : records_) {
      if (keep(r.material_id)) recs.push_back(r);
    }
    return Dataset(registry_, std::move(mats), std::move(recs));
  }

 private:
  PropertyRegistry registry_;
  std::vector<Material> materials_;
  std::vector<Record> records_;
};

// CSV columns (header required, any order):
//   material_id,smiles,property,fidelity,value,density
// density may be empty. Every SMILES is parsed eagerly.
// Throws UnknownChannel, ParseFailure, DuplicateRecord, NonPositiveForLog.
Dataset load_records(std::istream& in, const PropertyRegistry& registry,
                     DedupePolicy dedupe = DedupePolicy::Error);
Dataset load_records(const std::string& path, const PropertyRegistry& registry,
                     DedupePolicy dedupe = DedupePolicy::Error);

// Channel subsets used for the multi-task experiments:
//   1 detonation: D, P, Q_ex (exp and calc), E_G calc
//   2 subset 1 + h50 exp
//   3 subset 1 + H_sub calc, H_gas calc, H_f exp
//   4 thermodynamic: H_sub calc, H_gas calc, H_f exp
//   5 h50 exp + subset 4
//   6 all channels
// Returns registry indices in registry order. Throws UnknownSubset.
std::vector<std::size_t> subset_channels(const PropertyRegistry& registry, int subset_id);
Dataset subset_filter(const Dataset& dataset, int subset_id);

}  // namespace emtk
