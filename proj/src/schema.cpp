#include "emtk/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <set>

#include "emtk/descriptors.hpp"
#include "emtk/error.hpp"
#include "emtk/smiles.hpp"

namespace emtk {

namespace {

constexpr int kManifestVersion = 1;

struct FixedBlock {
  const char* name;
  std::vector<std::string> names;
};

const std::vector<FixedBlock>& fixed_blocks() {
  static const std::vector<FixedBlock> blocks = [] {
    std::vector<FixedBlock> b;
    b.push_back({"oxygen_balance", {"ob100"}});
    b.push_back({"gas_product_ratio", {"gas_product_ratio"}});
    b.push_back({"atom_counts", {"n_to_c_ratio", "n_h", "n_f"}});
    std::vector<std::string> groups;
    for (const auto& g : functional_group_table()) groups.push_back("fg_" + g.name);
    b.push_back({"functional_groups", groups});
    std::vector<std::string> rings;
    for (int s = 3; s <= 8; ++s) rings.push_back(fmt::format("ring_size_{}", s));
    rings.insert(rings.end(), {"rings_aromatic", "rings_aliphatic", "rings_hetero"});
    b.push_back({"rings", rings});
    b.push_back({"topology",
                 {"rotatable_bonds", "aromatic_atoms", "aromatic_bonds", "hbond_donors",
                  "hbond_acceptors", "bond_polarity_sum"}});
    b.push_back({"estate", {"estate_C", "estate_N", "estate_O", "estate_F", "estate_Cl"}});
    b.push_back({"vdw_volume", {"vdw_volume"}});
    b.push_back({"acid_base", {"acidic_groups", "basic_groups"}});
    return b;
  }();
  return blocks;
}

}  // namespace

BondKey BondKey::make(Element a, Element b, BondOrder order) {
  if (element_symbol(b) < element_symbol(a)) std::swap(a, b);
  return {a, b, order};
}

std::string BondKey::name() const {
  return fmt::format("bond:{}-{}:{}", element_symbol(first), element_symbol(second),
                     bond_order_name(order));
}

bool operator<(const BondKey& a, const BondKey& b) {
  if (a.first != b.first) return element_symbol(a.first) < element_symbol(b.first);
  if (a.second != b.second) return element_symbol(a.second) < element_symbol(b.second);
  return static_cast<int>(a.order) < static_cast<int>(b.order);
}

const std::vector<std::string>& fixed_descriptor_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& b : fixed_blocks()) n.insert(n.end(), b.names.begin(), b.names.end());
    return n;
  }();
  return names;
}

FeatureSchema::FeatureSchema(std::vector<BondKey> vocabulary, bool include_density)
    : vocabulary_(std::move(vocabulary)), include_density_(include_density) {
  if (!std::is_sorted(vocabulary_.begin(), vocabulary_.end()) ||
      std::adjacent_find(vocabulary_.begin(), vocabulary_.end()) != vocabulary_.end()) {
    throw Error(ErrorCode::SchemaMismatch, "bond vocabulary must be sorted and unique");
  }
  names_ = fixed_descriptor_names();
  for (const auto& k : vocabulary_) names_.push_back(k.name());
  if (include_density_) names_.push_back("density");
}

std::vector<SchemaBlock> FeatureSchema::blocks() const {
  std::vector<SchemaBlock> out;
  std::size_t offset = 0;
  for (const auto& b : fixed_blocks()) {
    out.push_back({b.name, offset, b.names.size()});
    offset += b.names.size();
  }
  out.push_back({"sum_over_bonds", offset, vocabulary_.size()});
  offset += vocabulary_.size();
  if (include_density_) out.push_back({"density", offset, 1});
  return out;
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json j;
  j["manifest_version"] = kManifestVersion;
  j["functional_group_table_version"] = kFunctionalGroupTableVersion;
  j["hydrogen_pseudo_bonds"] = true;
  j["include_density"] = include_density_;
  j["length"] = size();
  nlohmann::json vocab = nlohmann::json::array();
  for (const auto& k : vocabulary_) {
    vocab.push_back({element_symbol(k.first), element_symbol(k.second), bond_order_name(k.order)});
  }
  j["bond_vocabulary"] = vocab;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : this->blocks()) {
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"length", b.length}});
  }
  j["blocks"] = blocks;
  j["names"] = names_;
  return j;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  try {
    if (j.at("manifest_version").get<int>() != kManifestVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported schema manifest version");
    }
    if (j.at("functional_group_table_version").get<int>() != kFunctionalGroupTableVersion) {
      throw Error(ErrorCode::VersionMismatch, "schema built with another functional-group table");
    }
    std::vector<BondKey> vocab;
    for (const auto& entry : j.at("bond_vocabulary")) {
      const auto a = element_from_symbol(entry.at(0).get<std::string>());
      const auto b = element_from_symbol(entry.at(1).get<std::string>());
      const auto o = bond_order_from_name(entry.at(2).get<std::string>());
      if (!a || !b || !o) throw Error(ErrorCode::SchemaMismatch, "bad bond vocabulary entry");
      vocab.push_back(BondKey::make(*a, *b, *o));
    }
    FeatureSchema schema(std::move(vocab), j.at("include_density").get<bool>());
    if (j.contains("names") && j.at("names").get<std::vector<std::string>>() != schema.names()) {
      throw Error(ErrorCode::SchemaMismatch, "schema names do not match this build's layout");
    }
    return schema;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("malformed schema manifest: {}", e.what()));
  }
}

namespace {

std::map<BondKey, int> bond_counts(const MolGraph& g) {
  std::map<BondKey, int> counts;
  for (const auto& b : g.bonds()) {
    ++counts[BondKey::make(g.atoms()[b.begin].element, g.atoms()[b.end].element, b.order)];
  }
  for (const auto& a : g.atoms()) {
    if (a.implicit_h > 0) {
      counts[BondKey::make(a.element, Element::H, BondOrder::Single)] += a.implicit_h;
    }
  }
  return counts;
}

}  // namespace

std::vector<BondKey> fit_bond_vocabulary(std::span<const MolGraph> corpus) {
  std::set<BondKey> keys;
  for (const auto& g : corpus) {
    for (const auto& [k, n] : bond_counts(g)) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

std::vector<double> sum_over_bonds(const MolGraph& g, std::span<const BondKey> vocabulary) {
  std::vector<double> out(vocabulary.size(), 0.0);
  for (const auto& [k, n] : bond_counts(g)) {
    const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), k);
    if (it == vocabulary.end() || !(*it == k)) {
      throw Error(ErrorCode::UnknownBondType,
                  fmt::format("bond type {} is not in the fitted vocabulary", k.name()));
    }
    out[static_cast<std::size_t>(it - vocabulary.begin())] = n;
  }
  return out;
}

std::vector<double> fixed_descriptors(const MolGraph& g) {
  std::vector<double> v;
  v.reserve(fixed_descriptor_names().size());
  const ElementCounts counts = molecular_formula(g);
  v.push_back(oxygen_balance(counts));
  v.push_back(gas_product_ratio(counts));
  const auto atom = atom_count_features(counts);
  v.insert(v.end(), {atom.n_to_c_ratio, static_cast<double>(atom.n_H), static_cast<double>(atom.n_F)});
  for (int c : functional_group_counts(g)) v.push_back(c);
  const auto rings = ring_count_features(g);
  for (int c : rings.by_size) v.push_back(c);
  v.insert(v.end(), {static_cast<double>(rings.aromatic), static_cast<double>(rings.aliphatic),
                     static_cast<double>(rings.hetero)});
  const auto topo = topology_features(g);
  v.insert(v.end(), {static_cast<double>(topo.rotatable_bonds),
                     static_cast<double>(topo.aromatic_atoms),
                     static_cast<double>(topo.aromatic_bonds), static_cast<double>(topo.hbond_donors),
                     static_cast<double>(topo.hbond_acceptors), topo.bond_polarity_sum});
  const auto es = estate_indices(g);
  v.insert(v.end(), {es.sum_C, es.sum_N, es.sum_O, es.sum_F, es.sum_Cl});
  v.push_back(vdw_volume(g));
  const auto ab = acid_base_counts(g);
  v.insert(v.end(), {static_cast<double>(ab.acidic), static_cast<double>(ab.basic)});
  return v;
}

FeatureSchema fit_schema(std::span<const MolGraph> corpus, bool include_density) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyData, "cannot fit a schema on an empty corpus");
  return FeatureSchema(fit_bond_vocabulary(corpus), include_density);
}

FeatureSchema fit_schema(std::span<const NamedSmiles> corpus, bool include_density) {
  std::vector<MolGraph> graphs;
  graphs.reserve(corpus.size());
  for (const auto& m : corpus) {
    try {
      graphs.push_back(parse_smiles(m.smiles));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}: {}", m.id, e.what()));
    }
  }
  return fit_schema(std::span<const MolGraph>(graphs), include_density);
}

DescriptorVector featurize(const MolGraph& g, const FeatureSchema& schema,
                           std::optional<double> density) {
  if (g.fragment_count() != 1) {
    throw Error(ErrorCode::MultiFragment, "featurization needs a single-fragment molecule");
  }
  if (schema.include_density() && !density) {
    throw Error(ErrorCode::MissingDensity, "schema includes density but none was given");
  }
  if (!schema.include_density() && density) {
    throw Error(ErrorCode::UnexpectedDensity, "schema has no density slot");
  }
  DescriptorVector out;
  out.values = fixed_descriptors(g);
  const auto bonds = sum_over_bonds(g, schema.vocabulary());
  out.values.insert(out.values.end(), bonds.begin(), bonds.end());
  if (density) out.values.push_back(*density);
  for (double x : out.values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite descriptor value");
  }
  return out;
}

}  // namespace emtk
