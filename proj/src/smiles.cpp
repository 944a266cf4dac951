#include "emtk/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "emtk/error.hpp"
#include "emtk/rings.hpp"
#include "emtk/rng.hpp"

namespace emtk {
namespace {

struct RawAtom {
  Element element = Element::C;
  int charge = 0;
  bool aromatic = false;
  bool bracket = false;
  int bracket_h = 0;
};

struct RawBond {
  std::size_t a = 0;
  std::size_t b = 0;
  char symbol = 0;  // 0 when implicit
};

[[noreturn]] void syntax_error(std::string_view text, std::size_t pos, std::string_view what) {
  throw Error(ErrorCode::SyntaxError,
              fmt::format("{} at position {} in '{}'", what, pos, text));
}

[[noreturn]] void unsupported(std::string_view symbol) {
  throw Error(ErrorCode::UnsupportedElement,
              fmt::format("element '{}' is outside the CHNOClF set", symbol));
}

bool is_single_like(char s) { return s == '-' || s == '/' || s == '\\'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  void run() {
    if (text_.empty()) syntax_error(text_, 0, "empty SMILES");
    std::optional<std::size_t> prev;
    char pending = 0;
    std::size_t pending_pos = 0;
    std::vector<std::size_t> branches;
    bool need_atom = true;  // after start, '(' , '.' an atom (or bond) must follow
    struct OpenRing {
      std::size_t atom;
      char symbol;
    };
    std::map<int, OpenRing> open;

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (!prev) syntax_error(text_, pos_, "branch without a preceding atom");
        if (pending) syntax_error(text_, pos_, "bond before branch");
        branches.push_back(*prev);
        need_atom = true;
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) syntax_error(text_, pos_, "unbalanced ')'");
        if (pending || need_atom) syntax_error(text_, pos_, "empty or dangling branch");
        prev = branches.back();
        branches.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending || need_atom) syntax_error(text_, pos_, "misplaced '.'");
        if (!branches.empty()) syntax_error(text_, pos_, "'.' inside a branch");
        prev.reset();
        need_atom = true;
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (!prev || pending) syntax_error(text_, pos_, "misplaced bond symbol");
        pending = c;
        pending_pos = pos_;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (!prev || need_atom) syntax_error(text_, pos_, "ring closure without an atom");
        const std::size_t at = pos_;
        const int number = ring_number();
        auto it = open.find(number);
        if (it == open.end()) {
          open.emplace(number, OpenRing{*prev, pending});
        } else {
          const char s1 = it->second.symbol;
          const char s2 = pending;
          if (s1 && s2 && s1 != s2 && !(is_single_like(s1) && is_single_like(s2))) {
            syntax_error(text_, at, "conflicting ring-closure bond symbols");
          }
          if (it->second.atom == *prev) syntax_error(text_, at, "ring closure onto itself");
          add_bond(it->second.atom, *prev, s1 ? s1 : s2, at);
          open.erase(it);
        }
        pending = 0;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        syntax_error(text_, pos_, "whitespace inside SMILES");
      } else {
        const std::size_t at = pos_;
        const std::size_t atom = parse_atom();
        if (prev) add_bond(*prev, atom, pending, at);
        else if (pending) syntax_error(text_, pending_pos, "bond without a preceding atom");
        pending = 0;
        prev = atom;
        need_atom = false;
      }
    }
    if (pending) syntax_error(text_, pending_pos, "dangling bond at end");
    if (!branches.empty()) syntax_error(text_, text_.size(), "unbalanced '('");
    if (!open.empty()) {
      syntax_error(text_, text_.size(), fmt::format("dangling ring closure {}", open.begin()->first));
    }
    if (need_atom) syntax_error(text_, text_.size(), "expected an atom");
  }

  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;

 private:
  int ring_number() {
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        syntax_error(text_, pos_, "'%' must be followed by two digits");
      }
      const int n = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
      return n;
    }
    return text_[pos_++] - '0';
  }

  void add_bond(std::size_t a, std::size_t b, char symbol, std::size_t at) {
    for (const auto& bond : bonds) {
      if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) {
        syntax_error(text_, at, "more than one bond between the same atom pair");
      }
    }
    bonds.push_back({a, b, symbol});
  }

  std::size_t push_atom(RawAtom a) {
    atoms.push_back(a);
    return atoms.size() - 1;
  }

  std::size_t parse_atom() {
    const char c = text_[pos_];
    if (c == '[') return parse_bracket();
    switch (c) {
      case 'C':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
          pos_ += 2;
          return push_atom({Element::Cl});
        }
        ++pos_;
        return push_atom({Element::C});
      case 'N': ++pos_; return push_atom({Element::N});
      case 'O': ++pos_; return push_atom({Element::O});
      case 'F': ++pos_; return push_atom({Element::F});
      case 'c': ++pos_; return push_atom({Element::C, 0, true});
      case 'n': ++pos_; return push_atom({Element::N, 0, true});
      case 'o': ++pos_; return push_atom({Element::O, 0, true});
      case 'B':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') unsupported("Br");
        unsupported("B");
      case 'S': unsupported("S");
      case 'P': unsupported("P");
      case 'I': unsupported("I");
      case 's': unsupported("s");
      case 'p': unsupported("p");
      case 'b': unsupported("b");
      default: break;
    }
    syntax_error(text_, pos_, fmt::format("unexpected character '{}'", c));
  }

  std::size_t parse_bracket() {
    const std::size_t open_pos = pos_;
    ++pos_;  // '['
    auto peek = [&]() -> char { return pos_ < text_.size() ? text_[pos_] : '\0'; };
    auto digit = [&]() { return std::isdigit(static_cast<unsigned char>(peek())) != 0; };
    if (digit()) syntax_error(text_, pos_, "isotopes are not supported");

    RawAtom atom;
    atom.bracket = true;
    const char first = peek();
    if (std::isupper(static_cast<unsigned char>(first))) {
      std::string sym(1, first);
      ++pos_;
      if (std::islower(static_cast<unsigned char>(peek()))) {
        sym.push_back(peek());
        ++pos_;
      }
      const auto e = element_from_symbol(sym);
      if (!e) unsupported(sym);
      atom.element = *e;
    } else if (std::islower(static_cast<unsigned char>(first))) {
      ++pos_;
      switch (first) {
        case 'c': atom.element = Element::C; break;
        case 'n': atom.element = Element::N; break;
        case 'o': atom.element = Element::O; break;
        case 's':
        case 'p':
        case 'b': unsupported(std::string(1, first));
        case 'a':
          if (peek() == 's') unsupported("as");
          [[fallthrough]];
        default: syntax_error(text_, pos_ - 1, "bad bracket atom symbol");
      }
      atom.aromatic = true;
    } else {
      syntax_error(text_, pos_, "bad bracket atom");
    }

    // Chirality, ignored.
    while (peek() == '@') ++pos_;
    if (pos_ > 0 && text_[pos_ - 1] == '@' && std::isupper(static_cast<unsigned char>(peek())) &&
        peek() != 'H') {
      pos_ += 2;
      while (digit()) ++pos_;
    }
    if (peek() == 'H') {
      ++pos_;
      atom.bracket_h = 1;
      if (digit()) {
        atom.bracket_h = 0;
        while (digit()) atom.bracket_h = atom.bracket_h * 10 + (text_[pos_++] - '0');
      }
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      if (digit()) {
        magnitude = 0;
        while (digit()) magnitude = magnitude * 10 + (text_[pos_++] - '0');
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign == '+' ? magnitude : -magnitude;
    }
    if (peek() == ':') {
      ++pos_;
      if (!digit()) syntax_error(text_, pos_, "atom class needs digits");
      while (digit()) ++pos_;
    }
    if (peek() != ']') syntax_error(text_, open_pos, "unterminated or malformed bracket atom");
    ++pos_;
    return push_atom(atom);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Drops explicit, neutral, singly-bonded [H] atoms attached to a heavy atom.
void fold_explicit_hydrogens(std::vector<RawAtom>& atoms, std::vector<RawBond>& bonds) {
  std::vector<int> degree(atoms.size(), 0);
  for (const auto& b : bonds) {
    ++degree[b.a];
    ++degree[b.b];
  }
  std::vector<bool> drop(atoms.size(), false);
  for (const auto& b : bonds) {
    for (auto [h, heavy] : {std::pair{b.a, b.b}, std::pair{b.b, b.a}}) {
      const auto& ha = atoms[h];
      if (ha.element == Element::H && ha.charge == 0 && ha.bracket_h == 0 && degree[h] == 1 &&
          atoms[heavy].element != Element::H && (b.symbol == 0 || is_single_like(b.symbol))) {
        drop[h] = true;
        if (atoms[heavy].bracket) ++atoms[heavy].bracket_h;
      }
    }
  }
  if (std::none_of(drop.begin(), drop.end(), [](bool d) { return d; })) return;
  std::vector<std::size_t> remap(atoms.size(), 0);
  std::vector<RawAtom> kept;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    remap[i] = kept.size();
    if (!drop[i]) kept.push_back(atoms[i]);
  }
  std::vector<RawBond> kept_bonds;
  for (const auto& b : bonds) {
    if (drop[b.a] || drop[b.b]) continue;
    kept_bonds.push_back({remap[b.a], remap[b.b], b.symbol});
  }
  atoms = std::move(kept);
  bonds = std::move(kept_bonds);
}

int target_valence(const RawAtom& a) {
  const auto v = charged_valence(a.element, a.charge);
  if (!v) {
    throw Error(ErrorCode::ValenceError,
                fmt::format("no valid valence for {} with charge {}", element_symbol(a.element),
                            a.charge));
  }
  return *v;
}

class Kekulizer {
 public:
  Kekulizer(const std::vector<RawAtom>& atoms, std::vector<Bond>& bonds)
      : atoms_(atoms), bonds_(bonds), adj_(atoms.size()), needs_(atoms.size(), false),
        matched_(atoms.size(), false) {
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      if (bonds_[b].order != BondOrder::Aromatic) continue;
      adj_[bonds_[b].begin].push_back(b);
      adj_[bonds_[b].end].push_back(b);
    }
    for (std::size_t i = 0; i < adj_.size(); ++i) {
      std::sort(adj_[i].begin(), adj_[i].end(), [&](std::size_t x, std::size_t y) {
        return bonds_[x].other(i) < bonds_[y].other(i);
      });
    }
  }

  void run() {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!atoms_[i].aromatic) continue;
      int used = atoms_[i].bracket ? atoms_[i].bracket_h : 0;
      for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (bonds_[b].begin != i && bonds_[b].end != i) continue;
        used += bonds_[b].order == BondOrder::Aromatic ? 1 : bond_order_value(bonds_[b].order);
      }
      const int remaining = target_valence(atoms_[i]) - used;
      if (remaining < 0) {
        throw Error(ErrorCode::ValenceError,
                    fmt::format("aromatic atom {} exceeds its valence", i));
      }
      needs_[i] = remaining >= 1;
    }
    if (!match()) {
      throw Error(ErrorCode::KekulizationError, "aromatic system has no alternating bond assignment");
    }
    for (auto& b : bonds_) {
      if (b.order == BondOrder::Aromatic && b.kekule_order != BondOrder::Double) {
        b.kekule_order = BondOrder::Single;
      }
    }
  }

 private:
  bool match() {
    std::size_t i = 0;
    while (i < atoms_.size() && (!needs_[i] || matched_[i])) ++i;
    if (i == atoms_.size()) return true;
    for (std::size_t b : adj_[i]) {
      const std::size_t j = bonds_[b].other(i);
      if (!needs_[j] || matched_[j]) continue;
      matched_[i] = matched_[j] = true;
      bonds_[b].kekule_order = BondOrder::Double;
      if (match()) return true;
      bonds_[b].kekule_order = BondOrder::Single;
      matched_[i] = matched_[j] = false;
    }
    return false;
  }

  const std::vector<RawAtom>& atoms_;
  std::vector<Bond>& bonds_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<bool> needs_;
  std::vector<bool> matched_;
};

int kekule_sum(const std::vector<Bond>& bonds, std::size_t atom) {
  int s = 0;
  for (const auto& b : bonds) {
    if (b.begin == atom || b.end == atom) s += bond_order_value(b.kekule_order);
  }
  return s;
}

void normalize_nitro(std::vector<RawAtom>& atoms, std::vector<Bond>& bonds) {
  std::vector<int> degree(atoms.size(), 0);
  for (const auto& b : bonds) {
    ++degree[b.begin];
    ++degree[b.end];
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    auto& n = atoms[i];
    if (n.element != Element::N || n.charge != 0 || n.aromatic || n.bracket) continue;
    if (kekule_sum(bonds, i) != 5) continue;
    std::optional<std::size_t> pick;
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      if (bonds[b].begin != i && bonds[b].end != i) continue;
      const std::size_t o = bonds[b].other(i);
      const auto& oa = atoms[o];
      if (oa.element == Element::O && oa.charge == 0 && degree[o] == 1 &&
          bonds[b].kekule_order == BondOrder::Double) {
        if (!pick || bonds[*pick].other(i) < o) pick = b;
      }
    }
    if (!pick) continue;
    bonds[*pick].order = BondOrder::Single;
    bonds[*pick].kekule_order = BondOrder::Single;
    n.charge = 1;
    atoms[bonds[*pick].other(i)].charge = -1;
  }
}

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  Parser parser(text);
  parser.run();
  auto& raw_atoms = parser.atoms;
  auto& raw_bonds = parser.bonds;
  fold_explicit_hydrogens(raw_atoms, raw_bonds);

  std::vector<Bond> bonds;
  bonds.reserve(raw_bonds.size());
  for (const auto& rb : raw_bonds) {
    const bool both_aromatic = raw_atoms[rb.a].aromatic && raw_atoms[rb.b].aromatic;
    BondOrder order = BondOrder::Single;
    switch (rb.symbol) {
      case 0: order = both_aromatic ? BondOrder::Aromatic : BondOrder::Single; break;
      case '=': order = BondOrder::Double; break;
      case '#': order = BondOrder::Triple; break;
      case ':':
        if (!both_aromatic) {
          throw Error(ErrorCode::SyntaxError,
                      fmt::format("aromatic bond between non-aromatic atoms in '{}'", text));
        }
        order = BondOrder::Aromatic;
        break;
      default: order = BondOrder::Single; break;
    }
    bonds.push_back({rb.a, rb.b, order, order, false});
  }

  // Ring membership from the topology alone.
  std::vector<Edge> edges;
  for (const auto& b : bonds) edges.emplace_back(b.begin, b.end);
  for (const auto& cycle : minimum_cycle_basis(raw_atoms.size(), edges)) {
    for (std::size_t e : cycle) bonds[e].in_ring = true;
  }
  for (auto& b : bonds) {
    if (b.order == BondOrder::Aromatic && !b.in_ring) {
      b.order = BondOrder::Single;
      b.kekule_order = BondOrder::Single;
    }
  }
  for (std::size_t i = 0; i < raw_atoms.size(); ++i) {
    if (!raw_atoms[i].aromatic) continue;
    const bool ringed = std::any_of(bonds.begin(), bonds.end(), [&](const Bond& b) {
      return (b.begin == i || b.end == i) && b.order == BondOrder::Aromatic;
    });
    if (!ringed) {
      throw Error(ErrorCode::KekulizationError,
                  fmt::format("aromatic atom {} is not in an aromatic ring in '{}'", i, text));
    }
  }

  Kekulizer(raw_atoms, bonds).run();
  normalize_nitro(raw_atoms, bonds);

  std::vector<Atom> atoms(raw_atoms.size());
  for (std::size_t i = 0; i < raw_atoms.size(); ++i) {
    const auto& ra = raw_atoms[i];
    const int target = target_valence(ra);
    const int used = kekule_sum(bonds, i);
    int h = 0;
    if (ra.bracket) {
      h = ra.bracket_h;
      if (used + h != target) {
        throw Error(ErrorCode::ValenceError,
                    fmt::format("atom {} ({}{:+}) has valence {} but expects {} in '{}'", i,
                                element_symbol(ra.element), ra.charge, used + h, target, text));
      }
    } else {
      h = target - used;
      if (h < 0) {
        throw Error(ErrorCode::ValenceError,
                    fmt::format("atom {} ({}) exceeds valence {} in '{}'", i,
                                element_symbol(ra.element), target, text));
      }
    }
    atoms[i] = Atom{ra.element, ra.charge, ra.aromatic, h, i};
  }

  MolGraph g(std::move(atoms), std::move(bonds));
  auto rings = sssr_rings(g);
  for (std::size_t i = 0; i < g.atom_count(); ++i) {
    if (!g.atoms()[i].aromatic) continue;
    const bool in_aromatic_ring = std::any_of(rings.begin(), rings.end(), [&](const Ring& r) {
      return r.aromatic && std::find(r.atoms.begin(), r.atoms.end(), i) != r.atoms.end();
    });
    if (!in_aromatic_ring) {
      throw Error(ErrorCode::KekulizationError,
                  fmt::format("aromatic atom {} belongs to no aromatic ring in '{}'", i, text));
    }
  }
  g.set_rings(std::move(rings));
  return g;
}

namespace {

std::string atom_token(const Atom& a, bool kekule) {
  std::string s = "[";
  std::string sym(element_symbol(a.element));
  if (a.aromatic && !kekule) sym[0] = static_cast<char>(std::tolower(sym[0]));
  s += sym;
  if (a.implicit_h == 1) s += "H";
  else if (a.implicit_h > 1) s += fmt::format("H{}", a.implicit_h);
  if (a.formal_charge == 1) s += "+";
  else if (a.formal_charge == -1) s += "-";
  else if (a.formal_charge != 0) s += fmt::format("{:+}", a.formal_charge);
  s += "]";
  return s;
}

std::string bond_token(const MolGraph& g, const Bond& b, bool kekule) {
  const BondOrder o = kekule ? b.kekule_order : b.order;
  switch (o) {
    case BondOrder::Aromatic: return "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Single:
      if (!kekule && g.atoms()[b.begin].aromatic && g.atoms()[b.end].aromatic) return "-";
      return "";
  }
  return "";
}

std::string ring_label(int n) { return n < 10 ? std::to_string(n) : fmt::format("%{}", n); }

}  // namespace

std::string write_smiles(const MolGraph& g, const SmilesWriteOptions& options) {
  const std::size_t n = g.atom_count();
  std::optional<SplitMix64> rng;
  if (options.shuffle_seed != 0) rng.emplace(options.shuffle_seed);

  // Pass 1: DFS tree with ordered children; non-tree bonds become closures.
  std::vector<bool> visited(n, false);
  std::vector<bool> tree_bond(g.bond_count(), false);
  std::vector<std::vector<std::size_t>> children(n);  // bond indices
  std::vector<std::size_t> roots;
  std::vector<std::size_t> order;  // pre-order
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    visited[v] = true;
    order.push_back(v);
    std::vector<std::size_t> inc = g.incident_bonds(v);
    if (rng) shuffle(std::span<std::size_t>(inc), *rng);
    for (std::size_t b : inc) {
      const std::size_t w = g.bonds()[b].other(v);
      if (visited[w]) continue;
      tree_bond[b] = true;
      children[v].push_back(b);
      dfs(w);
    }
  };
  std::vector<std::size_t> starts(n);
  for (std::size_t i = 0; i < n; ++i) starts[i] = i;
  if (rng) shuffle(std::span<std::size_t>(starts), *rng);
  for (std::size_t s : starts) {
    if (visited[s]) continue;
    roots.push_back(s);
    dfs(s);
  }
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

  // Closures per atom, in emission order of the partner.
  std::vector<std::vector<std::size_t>> closures(n);
  for (std::size_t b = 0; b < g.bond_count(); ++b) {
    if (tree_bond[b]) continue;
    closures[g.bonds()[b].begin].push_back(b);
    closures[g.bonds()[b].end].push_back(b);
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(closures[v].begin(), closures[v].end(), [&](std::size_t x, std::size_t y) {
      return rank[g.bonds()[x].other(v)] < rank[g.bonds()[y].other(v)];
    });
  }

  std::map<std::size_t, int> open_label;  // bond -> label
  std::set<int> free_labels;
  int next_label = 1;
  std::string out;
  std::function<void(std::size_t)> emit = [&](std::size_t v) {
    out += atom_token(g.atoms()[v], options.kekule);
    for (std::size_t b : closures[v]) {
      auto it = open_label.find(b);
      if (it == open_label.end()) {
        int label;
        if (!free_labels.empty()) {
          label = *free_labels.begin();
          free_labels.erase(free_labels.begin());
        } else {
          label = next_label++;
        }
        open_label.emplace(b, label);
        out += bond_token(g, g.bonds()[b], options.kekule);
        out += ring_label(label);
      } else {
        out += ring_label(it->second);
        free_labels.insert(it->second);
        open_label.erase(it);
      }
    }
    const auto& kids = children[v];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const Bond& b = g.bonds()[kids[k]];
      const bool last = k + 1 == kids.size();
      if (!last) out += "(";
      out += bond_token(g, b, options.kekule);
      emit(b.other(v));
      if (!last) out += ")";
    }
  };
  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (r > 0) out += ".";
    emit(roots[r]);
  }
  return out;
}

}  // namespace emtk
