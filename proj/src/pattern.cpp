#include "emtk/pattern.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace emtk {

bool AtomQuery::matches(const MolGraph& g, std::size_t atom) const {
  const Atom& a = g.atoms()[atom];
  if (element && a.element != *element) return false;
  if (charge && a.formal_charge != *charge) return false;
  if (aromatic && a.aromatic != *aromatic) return false;
  if (total_h || min_h) {
    const int h = g.total_h(atom);
    if (total_h && h != *total_h) return false;
    if (min_h && h < *min_h) return false;
  }
  if (heavy_degree && g.heavy_degree(atom) != *heavy_degree) return false;
  if (double_bonded_oxygens) {
    int n = 0;
    for (std::size_t b : g.incident_bonds(atom)) {
      const Bond& bond = g.bonds()[b];
      if (bond.order == BondOrder::Double && g.atoms()[bond.other(atom)].element == Element::O) ++n;
    }
    if (n != *double_bonded_oxygens) return false;
  }
  if (predicate && !predicate(g, atom)) return false;
  return true;
}

namespace {

bool bond_matches(BondQuery q, BondOrder o) {
  switch (q) {
    case BondQuery::Any: return true;
    case BondQuery::Single: return o == BondOrder::Single;
    case BondQuery::Double: return o == BondOrder::Double;
    case BondQuery::Triple: return o == BondOrder::Triple;
    case BondQuery::Aromatic: return o == BondOrder::Aromatic;
    case BondQuery::SingleOrAromatic: return o == BondOrder::Single || o == BondOrder::Aromatic;
  }
  return false;
}

class Matcher {
 public:
  Matcher(const MolGraph& g, const SubstructurePattern& p) : g_(g), p_(p) {
    // Visit pattern atoms breadth-first so every atom after the first has an
    // already-mapped anchor.
    const std::size_t n = p.atoms.size();
    std::vector<bool> seen(n, false);
    anchor_.assign(n, kNone);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      order_.push_back(v);
      for (const auto& pb : p.bonds) {
        const std::size_t w = pb.a == v ? pb.b : (pb.b == v ? pb.a : kNone);
        if (w == kNone || seen[w]) continue;
        seen[w] = true;
        anchor_[w] = v;
        q.push(w);
      }
    }
    map_.assign(n, kNone);
    used_.assign(g.atom_count(), false);
  }

  std::vector<std::vector<std::size_t>> run() {
    if (p_.atoms.empty() || order_.size() != p_.atoms.size()) return {};
    extend(0);
    return {found_.begin(), found_.end()};
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool consistent(std::size_t pv, std::size_t gv) const {
    if (used_[gv] || !p_.atoms[pv].matches(g_, gv)) return false;
    for (const auto& pb : p_.bonds) {
      std::size_t other = kNone;
      if (pb.a == pv) other = pb.b;
      else if (pb.b == pv) other = pb.a;
      if (other == kNone || map_[other] == kNone) continue;
      const auto bond = g_.bond_between(gv, map_[other]);
      if (!bond || !bond_matches(pb.order, g_.bonds()[*bond].order)) return false;
    }
    return true;
  }

  void extend(std::size_t depth) {
    if (depth == order_.size()) {
      std::vector<std::size_t> atoms(map_);
      std::sort(atoms.begin(), atoms.end());
      found_.insert(std::move(atoms));
      return;
    }
    const std::size_t pv = order_[depth];
    auto attempt = [&](std::size_t gv) {
      if (!consistent(pv, gv)) return;
      map_[pv] = gv;
      used_[gv] = true;
      extend(depth + 1);
      used_[gv] = false;
      map_[pv] = kNone;
    };
    if (anchor_[pv] == kNone) {
      for (std::size_t gv = 0; gv < g_.atom_count(); ++gv) attempt(gv);
    } else {
      for (std::size_t gv : g_.neighbors(map_[anchor_[pv]])) attempt(gv);
    }
  }

  const MolGraph& g_;
  const SubstructurePattern& p_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> anchor_;
  std::vector<std::size_t> map_;
  std::vector<bool> used_;
  std::set<std::vector<std::size_t>> found_;
};

}  // namespace

std::vector<std::vector<std::size_t>> find_matches(const MolGraph& g,
                                                   const SubstructurePattern& p) {
  return Matcher(g, p).run();
}

std::size_t match_pattern(const MolGraph& g, const SubstructurePattern& p) {
  return find_matches(g, p).size();
}

}  // namespace emtk
