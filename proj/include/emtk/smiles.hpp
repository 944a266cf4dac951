#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "emtk/molgraph.hpp"

namespace emtk {

// Parses the supported SMILES subset into a perceived MolGraph.
//
// Grammar: organic-subset atoms C N O F Cl; bracket atoms over C N O F Cl H
// (and aromatic c n o) with optional chirality, hydrogen count, charge and
// atom class; aromatic lowercase c n o; bonds - = # : / \; branches; ring
// closures 0-9 and %nn; dot-separated fragments. Stereo marks are accepted
// and dropped; isotopes are rejected.
//
// Perception steps, in order:
//  1. explicit [H] atoms hanging off a single heavy atom are folded into
//     that atom's hydrogen count;
//  2. rings (SSSR) are perceived and aromatic bonds outside any ring are
//     demoted to single;
//  3. aromatic systems are kekulized by perfect matching, trying the lowest
//     atom index first;
//  4. neutral five-valent nitro nitrogens N(=O)=O are rewritten to the
//     charge-separated [N+](=O)[O-] form;
//  5. implicit hydrogens are assigned from the charge-adjusted valence.
//
// Throws Error with UnsupportedElement, SyntaxError, ValenceError or
// KekulizationError.
MolGraph parse_smiles(std::string_view text);

struct SmilesWriteOptions {
  // Uppercase atoms with explicit = bonds instead of lowercase aromatic atoms.
  bool kekule = false;
  // 0 writes atoms in index order from atom 0; any other value randomizes
  // root atoms and branch order, giving alternative spellings of the same
  // graph.
  std::uint64_t shuffle_seed = 0;
};

// Emits every atom as a bracket atom with an explicit hydrogen count, so the
// output re-parses to the same graph without relying on default valences.
std::string write_smiles(const MolGraph& g, const SmilesWriteOptions& options = {});

}  // namespace emtk
