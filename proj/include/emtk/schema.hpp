#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/molgraph.hpp"

namespace emtk {

// One sum-over-bonds key. Elements are stored in symbol order ("C" < "Cl" <
// "F" < "H" < "N" < "O"); implicit hydrogens contribute (X, H, single).
struct BondKey {
  Element first = Element::C;
  Element second = Element::C;
  BondOrder order = BondOrder::Single;

  static BondKey make(Element a, Element b, BondOrder order);
  std::string name() const;  // e.g. "bond:C-H:single"
  bool operator==(const BondKey&) const = default;
};

// Symbol-lexicographic, then single < double < triple < aromatic.
bool operator<(const BondKey& a, const BondKey& b);

// Ordered descriptor names of the fixed (corpus-independent) blocks.
const std::vector<std::string>& fixed_descriptor_names();

struct SchemaBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<BondKey> vocabulary, bool include_density);

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<BondKey>& vocabulary() const noexcept { return vocabulary_; }
  bool include_density() const noexcept { return include_density_; }
  std::size_t size() const noexcept { return names_.size(); }
  std::vector<SchemaBlock> blocks() const;

  // Schema manifest: block layout, bond vocabulary and flags.
  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& j);

  bool operator==(const FeatureSchema& other) const {
    return vocabulary_ == other.vocabulary_ && include_density_ == other.include_density_;
  }

 private:
  std::vector<BondKey> vocabulary_;
  bool include_density_ = false;
  std::vector<std::string> names_;
};

struct DescriptorVector {
  std::vector<double> values;
};

// Sorted set of bond keys across the corpus, including X-H pseudo-bonds.
std::vector<BondKey> fit_bond_vocabulary(std::span<const MolGraph> corpus);

// Counts aligned to `vocabulary`. Throws UnknownBondType for a key outside it.
std::vector<double> sum_over_bonds(const MolGraph& g, std::span<const BondKey> vocabulary);

// The fixed descriptor blocks for one molecule, aligned to
// fixed_descriptor_names().
std::vector<double> fixed_descriptors(const MolGraph& g);

FeatureSchema fit_schema(std::span<const MolGraph> corpus, bool include_density);

struct NamedSmiles {
  std::string id;
  std::string smiles;
};

// Parses and fits in one go; parse failures are rethrown with the molecule
// id prefixed to the message.
FeatureSchema fit_schema(std::span<const NamedSmiles> corpus, bool include_density);

// Throws MultiFragment, MissingDensity, UnexpectedDensity or UnknownBondType.
DescriptorVector featurize(const MolGraph& g, const FeatureSchema& schema,
                           std::optional<double> density);

}  // namespace emtk
