#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "emtk/molgraph.hpp"

namespace emtk {

using Edge = std::pair<std::size_t, std::size_t>;

// Minimum cycle basis of an undirected simple graph via Horton's candidate
// set and greedy GF(2) elimination. Each cycle is returned as a list of edge
// indices. Cardinality is edges - vertices + connected components. Cycles are
// ordered by (length, edge bitset) so the result depends only on the labelled
// graph.
std::vector<std::vector<std::size_t>> minimum_cycle_basis(std::size_t vertex_count,
                                                          const std::vector<Edge>& edges);

// Walks a cycle given as edge indices and returns its vertices in cycle
// order, starting from the smallest vertex and stepping to its smaller
// cycle neighbour.
std::vector<std::size_t> cycle_vertices(const std::vector<Edge>& edges,
                                        const std::vector<std::size_t>& cycle_edges);

// Smallest set of smallest rings with aromatic/hetero tags.
std::vector<Ring> sssr_rings(const MolGraph& g);

}  // namespace emtk
