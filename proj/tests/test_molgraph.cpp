#include <gtest/gtest.h>

#include <algorithm>

#include "emtk/error.hpp"
#include "emtk/rings.hpp"
#include "emtk/smiles.hpp"
#include "support.hpp"

namespace emtk {
namespace {

ErrorCode parse_error(const char* smiles) {
  try {
    parse_smiles(smiles);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << smiles << " parsed without error";
  return ErrorCode::InvalidArgument;
}

std::vector<std::size_t> ring_sizes(const MolGraph& g) {
  std::vector<std::size_t> out;
  for (const auto& r : g.rings()) out.push_back(r.size());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Smiles, MolecularFormulas) {
  struct Case {
    const char* smiles;
    ElementCounts counts;
  };
  const std::vector<Case> cases = {
      {"Cc1c(cc(cc1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]", {7, 5, 3, 6, 0, 0, 21}},
      {"C1N(CN(CN1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]", {3, 6, 6, 6, 0, 0, 21}},
      {"C(C(CO[N+](=O)[O-])O[N+](=O)[O-])O[N+](=O)[O-]", {3, 5, 3, 9, 0, 0, 20}},
      {"Clc1ccc(cc1[N+](=O)[O-])[N+](=O)[O-]", {6, 3, 2, 4, 1, 0, 16}},
      {"FC(F)(F)C[N+](=O)[O-]", {2, 2, 1, 2, 0, 3, 10}},
      {"C", {1, 4, 0, 0, 0, 0, 5}},
      {"[H]C([H])([H])[H]", {1, 4, 0, 0, 0, 0, 5}},
      {"N#N", {0, 0, 2, 0, 0, 0, 2}},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.smiles);
    EXPECT_EQ(molecular_formula(parse_smiles(c.smiles)), c.counts);
  }
}

TEST(Smiles, NeutralNitroIsNormalized) {
  const auto a = parse_smiles("CN(=O)=O");
  const auto b = parse_smiles("C[N+](=O)[O-]");
  ASSERT_EQ(a.atom_count(), b.atom_count());
  for (std::size_t i = 0; i < a.atom_count(); ++i) {
    EXPECT_EQ(a.atoms()[i].formal_charge + 0, b.atoms()[i].formal_charge + 0) << i;
  }
  int charge = 0;
  for (const auto& at : a.atoms()) charge += at.formal_charge;
  EXPECT_EQ(charge, 0);
}

TEST(Smiles, AromaticRingsAndKekulization) {
  const auto benzene = parse_smiles("c1ccccc1");
  ASSERT_EQ(benzene.rings().size(), 1u);
  EXPECT_TRUE(benzene.rings()[0].aromatic);
  int doubles = 0;
  for (const auto& b : benzene.bonds()) {
    EXPECT_EQ(b.order, BondOrder::Aromatic);
    doubles += b.kekule_order == BondOrder::Double;
  }
  EXPECT_EQ(doubles, 3);
  for (std::size_t i = 0; i < benzene.atom_count(); ++i) EXPECT_EQ(benzene.total_h(i), 1);

  EXPECT_EQ(ring_sizes(parse_smiles("c1ccc2ccccc2c1")), (std::vector<std::size_t>{6, 6}));
}

TEST(Smiles, InterRingAromaticBondIsDemoted) {
  const auto g = parse_smiles("c1ccccc1-c1ccccc1");
  int single = 0;
  for (const auto& b : g.bonds()) single += b.order == BondOrder::Single;
  EXPECT_EQ(single, 1);
  const auto h = parse_smiles("c1ccccc1c1ccccc1");
  single = 0;
  for (const auto& b : h.bonds()) single += b.order == BondOrder::Single;
  EXPECT_EQ(single, 1);
}

TEST(Smiles, Errors) {
  EXPECT_EQ(parse_error("C("), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("C1CC"), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error(""), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("CS"), ErrorCode::UnsupportedElement);
  EXPECT_EQ(parse_error("[Na+].[Cl-]"), ErrorCode::UnsupportedElement);
  EXPECT_EQ(parse_error("c1cccc1"), ErrorCode::KekulizationError);
  EXPECT_EQ(parse_error("C(C)(C)(C)(C)C"), ErrorCode::ValenceError);
  EXPECT_EQ(parse_error("[13CH4]"), ErrorCode::SyntaxError);
}

TEST(Smiles, FragmentsAreCounted) {
  EXPECT_EQ(parse_smiles("[NH4+].[O-][N+](=O)[O-]").fragment_count(), 2u);
  EXPECT_EQ(parse_smiles("CCO").fragment_count(), 1u);
}

TEST(Smiles, WriterRoundTripsCorpus) {
  for (const auto& m : testing::corpus()) {
    SCOPED_TRACE(m.name);
    const auto g = parse_smiles(m.smiles);
    for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 99ULL}) {
      const auto text = write_smiles(g, {false, seed});
      const auto back = parse_smiles(text);
      EXPECT_EQ(molecular_formula(back), molecular_formula(g)) << text;
      EXPECT_EQ(ring_sizes(back), ring_sizes(g)) << text;
      EXPECT_EQ(back.bond_count(), g.bond_count()) << text;
    }
  }
}

TEST(Rings, Cl20MatchesKnownRingSizes) {
  const auto g = parse_smiles(testing::corpus()[9].smiles);
  EXPECT_EQ(ring_sizes(g), (std::vector<std::size_t>{5, 5, 6, 7}));
}

TEST(Rings, BasisMatchesBruteForceOnCorpus) {
  for (const auto& m : testing::corpus()) {
    SCOPED_TRACE(m.name);
    const auto g = parse_smiles(m.smiles);
    std::vector<Edge> edges;
    for (const auto& b : g.bonds()) edges.push_back({b.begin, b.end});
    EXPECT_EQ(ring_sizes(g), testing::oracle_basis_lengths(g.atom_count(), edges));
  }
}

TEST(Rings, BasisMatchesBruteForceOnRandomGraphs) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(7);
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (rng.uniform() < 0.4 && edges.size() < 18) edges.push_back({a, b});
      }
    }
    const auto basis = minimum_cycle_basis(n, edges);
    std::vector<std::size_t> lengths;
    for (const auto& c : basis) lengths.push_back(c.size());
    std::sort(lengths.begin(), lengths.end());
    EXPECT_EQ(lengths, testing::oracle_basis_lengths(n, edges)) << "trial " << trial;
  }
}

TEST(Rings, CycleVerticesWalkTheCycle) {
  const std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  EXPECT_EQ(cycle_vertices(edges, {0, 1, 2, 3}), (std::vector<std::size_t>{0, 1, 2, 3}));
}

}  // namespace
}  // namespace emtk
