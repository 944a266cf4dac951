#include "emtk/rings.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <set>

namespace emtk {
namespace {

using Bits = std::vector<std::uint64_t>;

Bits make_bits(std::size_t n) { return Bits((n + 63) / 64, 0); }
void flip(Bits& b, std::size_t i) { b[i / 64] ^= (std::uint64_t{1} << (i % 64)); }
bool test(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1U; }

std::size_t lowest_set(const Bits& b) {
  for (std::size_t w = 0; w < b.size(); ++w) {
    if (b[w] != 0) return w * 64 + static_cast<std::size_t>(__builtin_ctzll(b[w]));
  }
  return static_cast<std::size_t>(-1);
}

struct Candidate {
  std::size_t length;
  Bits bits;
};

// BFS shortest-path tree rooted at `root`. Neighbours are visited in
// ascending edge order so ties resolve deterministically.
struct PathTree {
  std::vector<std::size_t> parent_edge;
  std::vector<std::size_t> depth;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

PathTree bfs_tree(std::size_t root, const std::vector<std::vector<std::size_t>>& adj,
                  const std::vector<Edge>& edges) {
  PathTree t{std::vector<std::size_t>(adj.size(), kNone),
             std::vector<std::size_t>(adj.size(), kNone)};
  std::queue<std::size_t> q;
  t.depth[root] = 0;
  q.push(root);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t e : adj[v]) {
      const std::size_t w = edges[e].first == v ? edges[e].second : edges[e].first;
      if (t.depth[w] == kNone) {
        t.depth[w] = t.depth[v] + 1;
        t.parent_edge[w] = e;
        q.push(w);
      }
    }
  }
  return t;
}

}  // namespace

std::vector<std::vector<std::size_t>> minimum_cycle_basis(std::size_t vertex_count,
                                                          const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(vertex_count);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].first].push_back(e);
    adj[edges[e].second].push_back(e);
  }

  // Cyclomatic number.
  std::vector<std::size_t> comp(vertex_count, kNone);
  std::size_t components = 0;
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (comp[v] != kNone) continue;
    const auto t = bfs_tree(v, adj, edges);
    for (std::size_t w = 0; w < vertex_count; ++w) {
      if (t.depth[w] != kNone) comp[w] = components;
    }
    ++components;
  }
  const std::size_t rank = edges.size() + components - vertex_count;
  if (rank == 0) return {};

  std::vector<Candidate> candidates;
  std::set<Bits> seen;
  for (std::size_t root = 0; root < vertex_count; ++root) {
    const auto tree = bfs_tree(root, adj, edges);
    // Path from root to v as edge list, vertices on it marked.
    auto path = [&](std::size_t v, Bits& ebits, std::vector<std::size_t>& verts) {
      std::size_t n = 0;
      verts.push_back(v);
      while (v != root) {
        const std::size_t e = tree.parent_edge[v];
        flip(ebits, e);
        ++n;
        v = edges[e].first == v ? edges[e].second : edges[e].first;
        verts.push_back(v);
      }
      return n;
    };
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [x, y] = edges[e];
      if (tree.depth[x] == kNone || tree.depth[y] == kNone) continue;
      if (tree.parent_edge[x] == e || tree.parent_edge[y] == e) continue;
      Bits bx = make_bits(edges.size());
      Bits by = make_bits(edges.size());
      std::vector<std::size_t> vx;
      std::vector<std::size_t> vy;
      const std::size_t lx = path(x, bx, vx);
      const std::size_t ly = path(y, by, vy);
      // Paths must share only the root.
      std::sort(vx.begin(), vx.end());
      std::sort(vy.begin(), vy.end());
      std::vector<std::size_t> common;
      std::set_intersection(vx.begin(), vx.end(), vy.begin(), vy.end(),
                            std::back_inserter(common));
      if (common.size() != 1) continue;
      Bits cycle = bx;
      for (std::size_t w = 0; w < cycle.size(); ++w) cycle[w] ^= by[w];
      flip(cycle, e);
      if (seen.insert(cycle).second) candidates.push_back({lx + ly + 1, std::move(cycle)});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.bits < b.bits;
  });

  // Greedy selection; independence tested against a reduced echelon basis.
  std::vector<Bits> echelon;
  std::vector<std::size_t> pivots;
  std::vector<std::vector<std::size_t>> basis;
  for (const auto& c : candidates) {
    Bits r = c.bits;
    for (std::size_t i = 0; i < echelon.size(); ++i) {
      if (test(r, pivots[i])) {
        for (std::size_t w = 0; w < r.size(); ++w) r[w] ^= echelon[i][w];
      }
    }
    const std::size_t p = lowest_set(r);
    if (p == kNone) continue;
    echelon.push_back(std::move(r));
    pivots.push_back(p);
    std::vector<std::size_t> cycle_edges;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (test(c.bits, e)) cycle_edges.push_back(e);
    }
    basis.push_back(std::move(cycle_edges));
    if (basis.size() == rank) break;
  }
  return basis;
}

std::vector<std::size_t> cycle_vertices(const std::vector<Edge>& edges,
                                        const std::vector<std::size_t>& cycle_edges) {
  if (cycle_edges.empty()) return {};
  std::size_t start = kNone;
  for (std::size_t e : cycle_edges) start = std::min({start, edges[e].first, edges[e].second});
  auto neighbours_of = [&](std::size_t v) {
    std::vector<std::pair<std::size_t, std::size_t>> out;  // (vertex, edge)
    for (std::size_t e : cycle_edges) {
      if (edges[e].first == v) out.emplace_back(edges[e].second, e);
      if (edges[e].second == v) out.emplace_back(edges[e].first, e);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<std::size_t> order{start};
  std::size_t prev_edge = kNone;
  std::size_t v = start;
  while (order.size() < cycle_edges.size()) {
    for (const auto& [w, e] : neighbours_of(v)) {
      if (e == prev_edge) continue;
      order.push_back(w);
      prev_edge = e;
      v = w;
      break;
    }
  }
  return order;
}

std::vector<Ring> sssr_rings(const MolGraph& g) {
  std::vector<Edge> edges;
  edges.reserve(g.bond_count());
  for (const auto& b : g.bonds()) edges.emplace_back(b.begin, b.end);
  const auto basis = minimum_cycle_basis(g.atom_count(), edges);
  std::vector<Ring> rings;
  rings.reserve(basis.size());
  for (const auto& cycle : basis) {
    Ring r;
    r.bonds = cycle;
    r.atoms = cycle_vertices(edges, cycle);
    r.aromatic = std::all_of(r.atoms.begin(), r.atoms.end(),
                             [&](std::size_t a) { return g.atoms()[a].aromatic; }) &&
                 std::all_of(r.bonds.begin(), r.bonds.end(), [&](std::size_t b) {
                   return g.bonds()[b].order == BondOrder::Aromatic;
                 });
    r.hetero = std::any_of(r.atoms.begin(), r.atoms.end(), [&](std::size_t a) {
      return g.atoms()[a].element != Element::C;
    });
    rings.push_back(std::move(r));
  }
  return rings;
}

}  // namespace emtk
