#pragma once

#include <array>
#include <string>
#include <vector>

#include "emtk/molgraph.hpp"
#include "emtk/pattern.hpp"

namespace emtk {

// ---------------------------------------------------------------------------
// Composition descriptors
// ---------------------------------------------------------------------------

// OB100 = 100 / n_atoms * (n_O - 2 n_C - n_H / 2). Halogens only enter
// through n_atoms.
double oxygen_balance(const ElementCounts& counts);

// Weight ratio of gaseous products to the explosive under the H2O-CO2
// decomposition assumption, with a = n_C, b = n_H, c = n_N, d = n_O:
//   G = (56c + 88d - 8b) / (48a + 4b + 56c + 64d).
// Negative values are returned as is. Throws ZeroDenominator when the
// molecule has no C, H, N or O.
double gas_product_ratio(const ElementCounts& counts);

struct AtomCountFeatures {
  double n_to_c_ratio = 0.0;  // n_N / max(n_C, 1)
  int n_H = 0;
  int n_F = 0;
};

AtomCountFeatures atom_count_features(const ElementCounts& counts);

// ---------------------------------------------------------------------------
// Substructure-derived descriptors
// ---------------------------------------------------------------------------

inline constexpr int kFunctionalGroupTableVersion = 1;

// The functional-group table, in output order:
//   nitro           C-[N+](=O)[O-]
//   nitramine       N-[N+](=O)[O-]
//   nitrate_ester   O-[N+](=O)[O-]
//   azide           N=[N+]=[N-] or [N-]-[N+]#N
//   amino_primary   C-[NH2] (non-aromatic N)
//   hydroxyl        C-[OH]
//   carbonyl        C=O on a non-aromatic carbon, terminal oxygen
//   cyano           C#N, terminal nitrogen
//   n_oxide         [N+]-[O-] where the N+ carries no =O
// A group may be described by more than one pattern; counts add up.
struct FunctionalGroup {
  std::string name;
  std::vector<SubstructurePattern> patterns;
};

const std::vector<FunctionalGroup>& functional_group_table();

std::vector<int> functional_group_counts(const MolGraph& g);

struct AcidBaseCounts {
  int acidic = 0;  // carboxylic acid + phenolic OH
  int basic = 0;   // single-bonded neutral amine N, not amide/nitramine
};

// Acid and base patterns: acidic_carboxyl, acidic_phenol, basic_amine.
const std::vector<FunctionalGroup>& acid_base_table();

AcidBaseCounts acid_base_counts(const MolGraph& g);

// ---------------------------------------------------------------------------
// Ring and topology descriptors
// ---------------------------------------------------------------------------

struct RingCountFeatures {
  std::array<int, 6> by_size{};  // sizes 3..8
  int aromatic = 0;
  int aliphatic = 0;
  int hetero = 0;
};

RingCountFeatures ring_count_features(const MolGraph& g);

struct TopologyFeatures {
  int rotatable_bonds = 0;
  int aromatic_atoms = 0;
  int aromatic_bonds = 0;
  int hbond_donors = 0;
  int hbond_acceptors = 0;
  double bond_polarity_sum = 0.0;
};

// Pauling electronegativities: H 2.20, C 2.55, N 3.04, O 3.44, F 3.98, Cl 3.16.
double pauling_electronegativity(Element e) noexcept;

// Rotatable: acyclic single bond whose ends both have heavy degree >= 2.
// Polarity: sum of |delta electronegativity| over graph bonds and over the
// X-H bonds implied by implicit hydrogens.
TopologyFeatures topology_features(const MolGraph& g);

// ---------------------------------------------------------------------------
// Electrotopological state
// ---------------------------------------------------------------------------

struct EStateResult {
  // Per atom; zero for hydrogen atoms, which are suppressed.
  std::vector<double> intrinsic;
  std::vector<double> estate;
  double sum_C = 0.0;
  double sum_N = 0.0;
  double sum_O = 0.0;
  double sum_F = 0.0;
  double sum_Cl = 0.0;
};

// Kier-Hall E-state on the hydrogen-suppressed graph:
//   delta   = heavy neighbours
//   delta_v = valence electrons - attached H
//   I       = ((2 / n)^2 delta_v + 1) / delta   (n: principal quantum number)
//   S_i     = I_i + sum_j (I_i - I_j) / (d_ij + 1)^2
// Atoms with delta = 0 get I = 0. Pairs in different fragments do not
// interact.
EStateResult estate_indices(const MolGraph& g);

// ---------------------------------------------------------------------------
// Van der Waals volume
// ---------------------------------------------------------------------------

// Atomic contributions of the atom-and-bond-contribution (ABC) scheme of
// Zhao, Abraham and Zissimos, J. Org. Chem. 68 (2003) 7368, in cubic
// angstroms.
double abc_atomic_volume(Element e) noexcept;

// V = sum(atomic) - 5.92 N_bonds - 14.7 R_aromatic - 3.8 R_nonaromatic,
// counting bonds to implicit hydrogens.
double vdw_volume(const MolGraph& g);

}  // namespace emtk
