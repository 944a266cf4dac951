#include "emtk/molgraph.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace emtk {

std::string_view element_symbol(Element e) noexcept {
  switch (e) {
    case Element::C: return "C";
    case Element::H: return "H";
    case Element::N: return "N";
    case Element::O: return "O";
    case Element::F: return "F";
    case Element::Cl: return "Cl";
  }
  return "?";
}

std::optional<Element> element_from_symbol(std::string_view symbol) noexcept {
  for (Element e : kAllElements) {
    if (element_symbol(e) == symbol) return e;
  }
  return std::nullopt;
}

int standard_valence(Element e) noexcept {
  switch (e) {
    case Element::C: return 4;
    case Element::N: return 3;
    case Element::O: return 2;
    case Element::H:
    case Element::F:
    case Element::Cl: return 1;
  }
  return 0;
}

std::optional<int> charged_valence(Element e, int charge) noexcept {
  int v = 0;
  switch (e) {
    case Element::C:
    case Element::H:
      // Carbocations and carbanions both lose a bonding position.
      v = standard_valence(e) - std::abs(charge);
      break;
    case Element::N:
    case Element::O:
    case Element::F:
    case Element::Cl:
      // Isoelectronic shift: [N+] is four-valent like C, [O-] one-valent.
      v = standard_valence(e) + charge;
      break;
  }
  if (v < 0) return std::nullopt;
  return v;
}

std::string_view bond_order_name(BondOrder order) noexcept {
  switch (order) {
    case BondOrder::Single: return "single";
    case BondOrder::Double: return "double";
    case BondOrder::Triple: return "triple";
    case BondOrder::Aromatic: return "aromatic";
  }
  return "?";
}

std::optional<BondOrder> bond_order_from_name(std::string_view name) noexcept {
  for (BondOrder o : {BondOrder::Single, BondOrder::Double, BondOrder::Triple,
                      BondOrder::Aromatic}) {
    if (bond_order_name(o) == name) return o;
  }
  return std::nullopt;
}

int bond_order_value(BondOrder order) noexcept {
  switch (order) {
    case BondOrder::Single: return 1;
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    case BondOrder::Aromatic: return 0;
  }
  return 0;
}

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size()) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) atoms_[i].index = i;
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    adjacency_[bonds_[b].begin].push_back(b);
    adjacency_[bonds_[b].end].push_back(b);
  }
}

std::vector<std::size_t> MolGraph::neighbors(std::size_t atom) const {
  std::vector<std::size_t> out;
  out.reserve(adjacency_[atom].size());
  for (std::size_t b : adjacency_[atom]) out.push_back(bonds_[b].other(atom));
  return out;
}

std::optional<std::size_t> MolGraph::bond_between(std::size_t a, std::size_t b) const {
  for (std::size_t idx : adjacency_[a]) {
    if (bonds_[idx].other(a) == b) return idx;
  }
  return std::nullopt;
}

int MolGraph::heavy_degree(std::size_t atom) const {
  int d = 0;
  for (std::size_t b : adjacency_[atom]) {
    if (atoms_[bonds_[b].other(atom)].element != Element::H) ++d;
  }
  return d;
}

int MolGraph::total_h(std::size_t atom) const {
  int h = atoms_[atom].implicit_h;
  for (std::size_t b : adjacency_[atom]) {
    if (atoms_[bonds_[b].other(atom)].element == Element::H) ++h;
  }
  return h;
}

int MolGraph::bond_order_sum(std::size_t atom) const {
  int sum = 0;
  for (std::size_t b : adjacency_[atom]) sum += bond_order_value(bonds_[b].kekule_order);
  return sum;
}

std::vector<std::size_t> MolGraph::fragment_labels() const {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(atoms_.size(), unset);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t root = 0; root < atoms_.size(); ++root) {
    if (label[root] != unset) continue;
    label[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b : adjacency_[a]) {
        const std::size_t n = bonds_[b].other(a);
        if (label[n] == unset) {
          label[n] = next;
          stack.push_back(n);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t MolGraph::fragment_count() const {
  const auto labels = fragment_labels();
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

void MolGraph::set_rings(std::vector<Ring> rings) {
  rings_ = std::move(rings);
  for (auto& b : bonds_) b.in_ring = false;
  for (const auto& r : rings_) {
    for (std::size_t b : r.bonds) bonds_[b].in_ring = true;
  }
}

ElementCounts molecular_formula(const MolGraph& g) {
  ElementCounts c;
  for (const auto& a : g.atoms()) {
    switch (a.element) {
      case Element::C: ++c.n_C; break;
      case Element::H: ++c.n_H; break;
      case Element::N: ++c.n_N; break;
      case Element::O: ++c.n_O; break;
      case Element::F: ++c.n_F; break;
      case Element::Cl: ++c.n_Cl; break;
    }
    c.n_H += a.implicit_h;
  }
  c.n_atoms = c.n_C + c.n_H + c.n_N + c.n_O + c.n_Cl + c.n_F;
  return c;
}

}  // namespace emtk
