#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emtk/molgraph.hpp"

namespace emtk {

// Constraints on one pattern atom. Unset fields match anything.
struct AtomQuery {
  std::optional<Element> element;
  std::optional<int> charge;
  std::optional<bool> aromatic;
  std::optional<int> total_h;
  std::optional<int> min_h;
  std::optional<int> heavy_degree;
  // Exact number of double bonds to oxygen.
  std::optional<int> double_bonded_oxygens;
  // Escape hatch for constraints the fields above cannot express.
  std::function<bool(const MolGraph&, std::size_t)> predicate;

  bool matches(const MolGraph& g, std::size_t atom) const;
};

enum class BondQuery { Any, Single, Double, Triple, Aromatic, SingleOrAromatic };

struct PatternBond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondQuery order = BondQuery::Any;
};

// A small connected query graph.
struct SubstructurePattern {
  std::string name;
  std::vector<AtomQuery> atoms;
  std::vector<PatternBond> bonds;
};

// Distinct embeddings, each reported as the sorted set of matched atom
// indices. Embeddings that differ only by a symmetry of the pattern (e.g. the
// two oxygens of a nitro group) collapse to one.
std::vector<std::vector<std::size_t>> find_matches(const MolGraph& g,
                                                   const SubstructurePattern& p);

std::size_t match_pattern(const MolGraph& g, const SubstructurePattern& p);

}  // namespace emtk
