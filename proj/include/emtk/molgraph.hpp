#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace emtk {

// The CHNOClF element set. Nothing else is constructible.
enum class Element : std::uint8_t { C, H, N, O, F, Cl };

inline constexpr std::array<Element, 6> kAllElements = {
    Element::C, Element::H, Element::N, Element::O, Element::F, Element::Cl};

std::string_view element_symbol(Element e) noexcept;
std::optional<Element> element_from_symbol(std::string_view symbol) noexcept;

// Neutral single-bond valence: C 4, N 3, O 2, H/F/Cl 1.
int standard_valence(Element e) noexcept;

// Valence after accounting for formal charge, or nullopt if the charge
// leaves no valid valence (e.g. O with charge -3).
std::optional<int> charged_valence(Element e, int charge) noexcept;

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

std::string_view bond_order_name(BondOrder order) noexcept;
std::optional<BondOrder> bond_order_from_name(std::string_view name) noexcept;
// Integer bond order; aromatic has no integer order and maps to 0.
int bond_order_value(BondOrder order) noexcept;

struct Atom {
  Element element = Element::C;
  int formal_charge = 0;
  bool aromatic = false;
  int implicit_h = 0;
  std::size_t index = 0;
};

struct Bond {
  std::size_t begin = 0;
  std::size_t end = 0;
  BondOrder order = BondOrder::Single;
  // Single or Double for aromatic bonds; equal to `order` otherwise.
  BondOrder kekule_order = BondOrder::Single;
  bool in_ring = false;

  std::size_t other(std::size_t atom) const noexcept {
    return atom == begin ? end : begin;
  }
};

struct Ring {
  std::vector<std::size_t> atoms;  // cycle order
  std::vector<std::size_t> bonds;
  bool aromatic = false;
  bool hetero = false;

  std::size_t size() const noexcept { return atoms.size(); }
};

// A perceived molecular graph. Produced by parse_smiles; immutable after
// that, so sharing across threads is safe.
class MolGraph {
 public:
  MolGraph() = default;
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const std::vector<Ring>& rings() const noexcept { return rings_; }

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }

  // Bond indices incident to `atom`, ascending.
  const std::vector<std::size_t>& incident_bonds(std::size_t atom) const {
    return adjacency_[atom];
  }
  std::vector<std::size_t> neighbors(std::size_t atom) const;
  std::optional<std::size_t> bond_between(std::size_t a, std::size_t b) const;

  // Neighbors that are not hydrogen atoms.
  int heavy_degree(std::size_t atom) const;
  // Implicit hydrogens plus explicit hydrogen-atom neighbors.
  int total_h(std::size_t atom) const;
  // Sum of kekulized bond orders over incident graph bonds.
  int bond_order_sum(std::size_t atom) const;

  std::size_t fragment_count() const;
  // Fragment label per atom, numbered by lowest atom index.
  std::vector<std::size_t> fragment_labels() const;

  // Set by ring perception during parsing.
  void set_rings(std::vector<Ring> rings);

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<Ring> rings_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

struct ElementCounts {
  int n_C = 0;
  int n_H = 0;
  int n_N = 0;
  int n_O = 0;
  int n_Cl = 0;
  int n_F = 0;
  int n_atoms = 0;

  bool operator==(const ElementCounts&) const = default;
};

// Hydrogen count includes implicit hydrogens.
ElementCounts molecular_formula(const MolGraph& g);

}  // namespace emtk
