#include "emtk/descriptors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <queue>

#include "emtk/error.hpp"

namespace emtk {

double oxygen_balance(const ElementCounts& c) {
  if (c.n_atoms < 1) throw Error(ErrorCode::InvalidArgument, "oxygen balance needs at least one atom");
  return 100.0 / c.n_atoms * (c.n_O - 2.0 * c.n_C - c.n_H / 2.0);
}

double gas_product_ratio(const ElementCounts& c) {
  const double a = c.n_C;
  const double b = c.n_H;
  const double n = c.n_N;
  const double d = c.n_O;
  const double denominator = 48.0 * a + 4.0 * b + 56.0 * n + 64.0 * d;
  if (denominator == 0.0) {
    throw Error(ErrorCode::ZeroDenominator, "gas product ratio needs at least one C, H, N or O atom");
  }
  return (56.0 * n + 88.0 * d - 8.0 * b) / denominator;
}

AtomCountFeatures atom_count_features(const ElementCounts& c) {
  return {static_cast<double>(c.n_N) / std::max(c.n_C, 1), c.n_H, c.n_F};
}

namespace {

AtomQuery element_query(Element e) {
  AtomQuery q;
  q.element = e;
  return q;
}

// X-[N+](=O)[O-] with X as atom 0.
SubstructurePattern nitro_on(std::string name, AtomQuery anchor) {
  AtomQuery n = element_query(Element::N);
  n.charge = 1;
  n.double_bonded_oxygens = 1;
  AtomQuery o_double = element_query(Element::O);
  o_double.charge = 0;
  o_double.heavy_degree = 1;
  AtomQuery o_minus = element_query(Element::O);
  o_minus.charge = -1;
  o_minus.heavy_degree = 1;
  return {std::move(name),
          {std::move(anchor), n, o_double, o_minus},
          {{0, 1, BondQuery::Single}, {1, 2, BondQuery::Double}, {1, 3, BondQuery::Single}}};
}

std::vector<FunctionalGroup> build_functional_groups() {
  std::vector<FunctionalGroup> table;

  table.push_back({"nitro", {nitro_on("nitro", element_query(Element::C))}});

  AtomQuery amine_n = element_query(Element::N);
  amine_n.charge = 0;
  table.push_back({"nitramine", {nitro_on("nitramine", amine_n)}});

  AtomQuery ester_o = element_query(Element::O);
  ester_o.charge = 0;
  ester_o.heavy_degree = 2;
  table.push_back({"nitrate_ester", {nitro_on("nitrate_ester", ester_o)}});

  {
    AtomQuery n1 = element_query(Element::N);
    n1.charge = 0;
    AtomQuery n2 = element_query(Element::N);
    n2.charge = 1;
    AtomQuery n3 = element_query(Element::N);
    n3.charge = -1;
    n3.heavy_degree = 1;
    SubstructurePattern cumulated{
        "azide", {n1, n2, n3}, {{0, 1, BondQuery::Double}, {1, 2, BondQuery::Double}}};
    AtomQuery m1 = element_query(Element::N);
    m1.charge = -1;
    AtomQuery m2 = element_query(Element::N);
    m2.charge = 1;
    AtomQuery m3 = element_query(Element::N);
    m3.charge = 0;
    m3.heavy_degree = 1;
    SubstructurePattern ylidic{
        "azide", {m1, m2, m3}, {{0, 1, BondQuery::Single}, {1, 2, BondQuery::Triple}}};
    table.push_back({"azide", {cumulated, ylidic}});
  }

  {
    AtomQuery n = element_query(Element::N);
    n.charge = 0;
    n.aromatic = false;
    n.total_h = 2;
    n.heavy_degree = 1;
    table.push_back({"amino_primary",
                     {{"amino_primary", {n, element_query(Element::C)}, {{0, 1, BondQuery::Single}}}}});
  }
  {
    AtomQuery o = element_query(Element::O);
    o.charge = 0;
    o.total_h = 1;
    o.heavy_degree = 1;
    table.push_back(
        {"hydroxyl", {{"hydroxyl", {o, element_query(Element::C)}, {{0, 1, BondQuery::Single}}}}});
  }
  {
    AtomQuery c = element_query(Element::C);
    c.aromatic = false;
    AtomQuery o = element_query(Element::O);
    o.charge = 0;
    o.heavy_degree = 1;
    table.push_back({"carbonyl", {{"carbonyl", {c, o}, {{0, 1, BondQuery::Double}}}}});
  }
  {
    AtomQuery n = element_query(Element::N);
    n.charge = 0;
    n.heavy_degree = 1;
    table.push_back(
        {"cyano", {{"cyano", {element_query(Element::C), n}, {{0, 1, BondQuery::Triple}}}}});
  }
  {
    AtomQuery n = element_query(Element::N);
    n.charge = 1;
    n.double_bonded_oxygens = 0;
    AtomQuery o = element_query(Element::O);
    o.charge = -1;
    o.heavy_degree = 1;
    table.push_back({"n_oxide", {{"n_oxide", {n, o}, {{0, 1, BondQuery::Single}}}}});
  }
  return table;
}

bool is_carbonyl_carbon(const MolGraph& g, std::size_t atom) {
  if (g.atoms()[atom].element != Element::C) return false;
  for (std::size_t b : g.incident_bonds(atom)) {
    const Bond& bond = g.bonds()[b];
    if (bond.order == BondOrder::Double && g.atoms()[bond.other(atom)].element == Element::O) {
      return true;
    }
  }
  return false;
}

bool is_nitro_nitrogen(const MolGraph& g, std::size_t atom) {
  const Atom& a = g.atoms()[atom];
  if (a.element != Element::N || a.formal_charge != 1) return false;
  for (std::size_t b : g.incident_bonds(atom)) {
    const Bond& bond = g.bonds()[b];
    if (bond.order == BondOrder::Double && g.atoms()[bond.other(atom)].element == Element::O) {
      return true;
    }
  }
  return false;
}

bool is_basic_amine(const MolGraph& g, std::size_t atom) {
  const Atom& a = g.atoms()[atom];
  if (a.element != Element::N || a.formal_charge != 0 || a.aromatic) return false;
  int carbons = 0;
  for (std::size_t b : g.incident_bonds(atom)) {
    const Bond& bond = g.bonds()[b];
    if (bond.order != BondOrder::Single) return false;
    const std::size_t n = bond.other(atom);
    if (is_carbonyl_carbon(g, n) || is_nitro_nitrogen(g, n)) return false;
    if (g.atoms()[n].element == Element::C) ++carbons;
  }
  return g.total_h(atom) >= 1 || carbons >= 2;
}

std::vector<FunctionalGroup> build_acid_base() {
  std::vector<FunctionalGroup> table;
  {
    AtomQuery c = element_query(Element::C);
    c.aromatic = false;
    AtomQuery o_double = element_query(Element::O);
    o_double.charge = 0;
    o_double.heavy_degree = 1;
    AtomQuery o_h = element_query(Element::O);
    o_h.charge = 0;
    o_h.total_h = 1;
    o_h.heavy_degree = 1;
    table.push_back({"acidic_carboxyl",
                     {{"acidic_carboxyl",
                       {c, o_double, o_h},
                       {{0, 1, BondQuery::Double}, {0, 2, BondQuery::Single}}}}});
  }
  {
    AtomQuery c = element_query(Element::C);
    c.aromatic = true;
    AtomQuery o_h = element_query(Element::O);
    o_h.charge = 0;
    o_h.total_h = 1;
    o_h.heavy_degree = 1;
    table.push_back(
        {"acidic_phenol", {{"acidic_phenol", {c, o_h}, {{0, 1, BondQuery::Single}}}}});
  }
  {
    AtomQuery n = element_query(Element::N);
    n.predicate = is_basic_amine;
    table.push_back({"basic_amine", {{"basic_amine", {n}, {}}}});
  }
  return table;
}

int count_group(const MolGraph& g, const FunctionalGroup& group) {
  std::size_t total = 0;
  for (const auto& p : group.patterns) total += match_pattern(g, p);
  return static_cast<int>(total);
}

}  // namespace

const std::vector<FunctionalGroup>& functional_group_table() {
  static const std::vector<FunctionalGroup> table = build_functional_groups();
  return table;
}

std::vector<int> functional_group_counts(const MolGraph& g) {
  std::vector<int> out;
  for (const auto& group : functional_group_table()) out.push_back(count_group(g, group));
  return out;
}

const std::vector<FunctionalGroup>& acid_base_table() {
  static const std::vector<FunctionalGroup> table = build_acid_base();
  return table;
}

AcidBaseCounts acid_base_counts(const MolGraph& g) {
  const auto& t = acid_base_table();
  return {count_group(g, t[0]) + count_group(g, t[1]), count_group(g, t[2])};
}

RingCountFeatures ring_count_features(const MolGraph& g) {
  RingCountFeatures f;
  for (const auto& r : g.rings()) {
    if (r.size() >= 3 && r.size() <= 8) ++f.by_size[r.size() - 3];
    if (r.aromatic) ++f.aromatic;
    else ++f.aliphatic;
    if (r.hetero) ++f.hetero;
  }
  return f;
}

double pauling_electronegativity(Element e) noexcept {
  switch (e) {
    case Element::H: return 2.20;
    case Element::C: return 2.55;
    case Element::N: return 3.04;
    case Element::O: return 3.44;
    case Element::F: return 3.98;
    case Element::Cl: return 3.16;
  }
  return 0.0;
}

namespace {

// Sums in a canonical order so results do not depend on atom numbering.
double ordered_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

TopologyFeatures topology_features(const MolGraph& g) {
  TopologyFeatures f;
  std::vector<double> polarity;
  for (const auto& b : g.bonds()) {
    if (b.order == BondOrder::Single && !b.in_ring && g.heavy_degree(b.begin) >= 2 &&
        g.heavy_degree(b.end) >= 2) {
      ++f.rotatable_bonds;
    }
    if (b.order == BondOrder::Aromatic) ++f.aromatic_bonds;
    polarity.push_back(std::abs(pauling_electronegativity(g.atoms()[b.begin].element) -
                                pauling_electronegativity(g.atoms()[b.end].element)));
  }
  const double en_h = pauling_electronegativity(Element::H);
  for (std::size_t i = 0; i < g.atom_count(); ++i) {
    const Atom& a = g.atoms()[i];
    if (a.aromatic) ++f.aromatic_atoms;
    if (a.element == Element::N || a.element == Element::O) {
      ++f.hbond_acceptors;
      if (g.total_h(i) >= 1) ++f.hbond_donors;
    }
    polarity.insert(polarity.end(), static_cast<std::size_t>(a.implicit_h),
                    std::abs(pauling_electronegativity(a.element) - en_h));
  }
  f.bond_polarity_sum = ordered_sum(std::move(polarity));
  return f;
}

namespace {

int valence_electrons(Element e) {
  switch (e) {
    case Element::H: return 1;
    case Element::C: return 4;
    case Element::N: return 5;
    case Element::O: return 6;
    case Element::F:
    case Element::Cl: return 7;
  }
  return 0;
}

int principal_quantum_number(Element e) {
  switch (e) {
    case Element::H: return 1;
    case Element::Cl: return 3;
    default: return 2;
  }
}

}  // namespace

EStateResult estate_indices(const MolGraph& g) {
  const std::size_t n = g.atom_count();
  EStateResult r;
  r.intrinsic.assign(n, 0.0);
  r.estate.assign(n, 0.0);
  std::vector<bool> heavy(n);
  for (std::size_t i = 0; i < n; ++i) heavy[i] = g.atoms()[i].element != Element::H;

  for (std::size_t i = 0; i < n; ++i) {
    if (!heavy[i]) continue;
    const int delta = g.heavy_degree(i);
    if (delta == 0) continue;
    const Element e = g.atoms()[i].element;
    const double delta_v = valence_electrons(e) - g.total_h(i);
    const double q = 2.0 / principal_quantum_number(e);
    r.intrinsic[i] = (q * q * delta_v + 1.0) / delta;
  }

  // Each pair contributes with opposite signs, so sum(S) == sum(I) to rounding.
  std::vector<std::vector<double>> perturbation(n);
  constexpr std::size_t unreached = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!heavy[i]) continue;
    std::vector<std::size_t> dist(n, unreached);
    std::queue<std::size_t> q;
    dist[i] = 0;
    q.push(i);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t w : g.neighbors(v)) {
        if (!heavy[w] || dist[w] != unreached) continue;
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!heavy[j] || dist[j] == unreached) continue;
      const double p = static_cast<double>(dist[j]) + 1.0;
      const double term = (r.intrinsic[i] - r.intrinsic[j]) / (p * p);
      perturbation[i].push_back(term);
      perturbation[j].push_back(-term);
    }
  }

  std::array<std::vector<double>, 5> by_element;
  for (std::size_t i = 0; i < n; ++i) {
    if (!heavy[i]) continue;
    r.estate[i] = r.intrinsic[i] + ordered_sum(std::move(perturbation[i]));
    switch (g.atoms()[i].element) {
      case Element::C: by_element[0].push_back(r.estate[i]); break;
      case Element::N: by_element[1].push_back(r.estate[i]); break;
      case Element::O: by_element[2].push_back(r.estate[i]); break;
      case Element::F: by_element[3].push_back(r.estate[i]); break;
      case Element::Cl: by_element[4].push_back(r.estate[i]); break;
      case Element::H: break;
    }
  }
  r.sum_C = ordered_sum(std::move(by_element[0]));
  r.sum_N = ordered_sum(std::move(by_element[1]));
  r.sum_O = ordered_sum(std::move(by_element[2]));
  r.sum_F = ordered_sum(std::move(by_element[3]));
  r.sum_Cl = ordered_sum(std::move(by_element[4]));
  return r;
}

double abc_atomic_volume(Element e) noexcept {
  switch (e) {
    case Element::H: return 7.24;
    case Element::C: return 20.58;
    case Element::N: return 15.60;
    case Element::O: return 14.71;
    case Element::F: return 13.31;
    case Element::Cl: return 22.45;
  }
  return 0.0;
}

double vdw_volume(const MolGraph& g) {
  const ElementCounts c = molecular_formula(g);
  const double atomic = c.n_C * abc_atomic_volume(Element::C) + c.n_H * abc_atomic_volume(Element::H) +
                        c.n_N * abc_atomic_volume(Element::N) + c.n_O * abc_atomic_volume(Element::O) +
                        c.n_F * abc_atomic_volume(Element::F) + c.n_Cl * abc_atomic_volume(Element::Cl);
  std::size_t bonds = g.bond_count();
  for (const auto& a : g.atoms()) bonds += static_cast<std::size_t>(a.implicit_h);
  int aromatic = 0;
  int other = 0;
  for (const auto& r : g.rings()) (r.aromatic ? aromatic : other) += 1;
  return atomic - 5.92 * static_cast<double>(bonds) - 14.7 * aromatic - 3.8 * other;
}

}  // namespace emtk
