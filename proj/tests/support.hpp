#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emtk/descriptors.hpp"
#include "emtk/forest.hpp"
#include "emtk/matrix.hpp"
#include "emtk/mtnn.hpp"
#include "emtk/registry.hpp"
#include "emtk/rng.hpp"
#include "emtk/rings.hpp"
#include "emtk/samples.hpp"
#include "emtk/smiles.hpp"

namespace emtk::testing {

struct NamedMolecule {
  const char* name;
  const char* smiles;
};

// Energetic materials and small reference molecules.
inline const std::vector<NamedMolecule>& corpus() {
  static const std::vector<NamedMolecule> mols = {
      {"TNT", "Cc1c(cc(cc1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"RDX", "C1N(CN(CN1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"HMX", "C1N(CN(CN(CN1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"PETN", "C(C(CO[N+](=O)[O-])(CO[N+](=O)[O-])CO[N+](=O)[O-])O[N+](=O)[O-]"},
      {"NG", "C(C(CO[N+](=O)[O-])O[N+](=O)[O-])O[N+](=O)[O-]"},
      {"TATB", "c1(c(c(c(c(c1[N+](=O)[O-])N)[N+](=O)[O-])N)[N+](=O)[O-])N"},
      {"FOX-7", "C(=C([N+](=O)[O-])[N+](=O)[O-])(N)N"},
      {"NTO", "C1(=O)NC(=NN1)[N+](=O)[O-]"},
      {"TNAZ", "C1C(CN1[N+](=O)[O-])([N+](=O)[O-])[N+](=O)[O-]"},
      {"CL-20",
       "C12C3N(C4C(N3[N+](=O)[O-])N(C(N1[N+](=O)[O-])C(N2[N+](=O)[O-])N4[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"picric acid", "Oc1c(cc(cc1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"tetryl", "CN(c1c(cc(cc1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]"},
      {"DNAN", "COc1ccc(cc1[N+](=O)[O-])[N+](=O)[O-]"},
      {"nitroguanidine", "NC(=N[N+](=O)[O-])N"},
      {"chlorodinitrobenzene", "Clc1ccc(cc1[N+](=O)[O-])[N+](=O)[O-]"},
      {"methyl azide", "CN=[N+]=[N-]"},
      {"nitromethane", "C[N+](=O)[O-]"},
      {"trifluoronitroethane", "FC(F)(F)C[N+](=O)[O-]"},
      {"cyanogen", "N#CC#N"},
      {"benzene", "c1ccccc1"},
      {"naphthalene", "c1ccc2ccccc2c1"},
      {"ethanol", "CCO"},
      {"acetone", "CC(=O)C"},
      {"methane", "C"},
      {"ethane", "CC"},
  };
  return mols;
}

// Hand-written alternative spellings: atom order, ring labels, branch order,
// explicit hydrogens, bracket atoms and nitro notation all vary.
struct Spellings {
  const char* name;
  std::vector<std::string> smiles;
};

inline const std::vector<Spellings>& alternate_spellings() {
  static const std::vector<Spellings> list = {
      {"TNT",
       {"Cc1c(cc(cc1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]", "[O-][N+](=O)c1cc([N+]([O-])=O)c(C)c(N(=O)=O)c1",
        "O=N(=O)c1cc(N(=O)=O)cc(N(=O)=O)c1C"}},
      {"RDX",
       {"C1N(CN(CN1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]", "O=N(=O)N1CN(N(=O)=O)CN(N(=O)=O)C1",
        "[CH2]1N([N+]([O-])=O)[CH2]N([N+](=O)[O-])[CH2]N1[N+](=O)[O-]"}},
      {"HMX",
       {"C1N(CN(CN(CN1[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]",
        "O=N(=O)N1CN(N(=O)=O)CN(N(=O)=O)CN(N(=O)=O)C1"}},
      {"PETN",
       {"C(C(CO[N+](=O)[O-])(CO[N+](=O)[O-])CO[N+](=O)[O-])O[N+](=O)[O-]",
        "O=N(=O)OCC(CON(=O)=O)(CON(=O)=O)CON(=O)=O"}},
      {"NG", {"C(C(CO[N+](=O)[O-])O[N+](=O)[O-])O[N+](=O)[O-]", "[O-][N+](=O)OC(CO[N+]([O-])=O)CO[N+]([O-])=O"}},
      {"TATB",
       {"c1(c(c(c(c(c1[N+](=O)[O-])N)[N+](=O)[O-])N)[N+](=O)[O-])N",
        "Nc1c([N+]([O-])=O)c(N)c([N+]([O-])=O)c(N)c1[N+]([O-])=O"}},
      {"FOX-7", {"C(=C([N+](=O)[O-])[N+](=O)[O-])(N)N", "NC(N)=C(N(=O)=O)N(=O)=O"}},
      {"NTO", {"C1(=O)NC(=NN1)[N+](=O)[O-]", "O=C1NN=C(N1)[N+]([O-])=O"}},
      {"TNAZ", {"C1C(CN1[N+](=O)[O-])([N+](=O)[O-])[N+](=O)[O-]", "O=N(=O)C1(N(=O)=O)CN(N(=O)=O)C1"}},
      {"CL-20",
       {"C12C3N(C4C(N3[N+](=O)[O-])N(C(N1[N+](=O)[O-])C(N2[N+](=O)[O-])N4[N+](=O)[O-])[N+](=O)[O-])[N+](=O)[O-]",
        "C12C3N(C4C(N3N(=O)=O)N(C(N1N(=O)=O)C(N2N(=O)=O)N4N(=O)=O)N(=O)=O)N(=O)=O"}},
      {"benzene", {"c1ccccc1", "c%10ccccc%10", "[cH]1[cH][cH][cH][cH][cH]1"}},
      {"naphthalene", {"c1ccc2ccccc2c1", "c12ccccc1cccc2"}},
      {"nitromethane", {"C[N+](=O)[O-]", "CN(=O)=O", "[O-][N+](C)=O", "[H]C([H])([H])[N+](=O)[O-]"}},
      {"ethanol", {"CCO", "OCC", "[CH3][CH2][OH]", "C(O)C"}},
  };
  return list;
}

// ---------------------------------------------------------------------------
// Cycle-basis oracle: enumerate every simple cycle, then take a minimum-weight
// independent set greedily over GF(2). Only for small graphs.
// ---------------------------------------------------------------------------

using EdgeBits = std::bitset<64>;

inline std::vector<EdgeBits> all_simple_cycles(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, edge)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].first].push_back({edges[e].second, e});
    adj[edges[e].second].push_back({edges[e].first, e});
  }
  std::vector<EdgeBits> cycles;
  std::vector<bool> on_path(n, false);
  EdgeBits path;
  // Cycles through `start` using only vertices >= start, so each cycle is
  // found from its smallest vertex (twice, once per direction).
  auto dfs = [&](auto&& self, std::size_t start, std::size_t v, std::size_t depth) -> void {
    for (auto [w, e] : adj[v]) {
      if (path[e]) continue;
      if (w == start && depth >= 2) {
        EdgeBits c = path;
        c.set(e);
        if (std::find(cycles.begin(), cycles.end(), c) == cycles.end()) cycles.push_back(c);
        continue;
      }
      if (w <= start || on_path[w]) continue;
      on_path[w] = true;
      path.set(e);
      self(self, start, w, depth + 1);
      path.reset(e);
      on_path[w] = false;
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    on_path[s] = true;
    dfs(dfs, s, s, 0);
    on_path[s] = false;
  }
  return cycles;
}

// Sorted cycle lengths of a minimum cycle basis.
inline std::vector<std::size_t> oracle_basis_lengths(std::size_t n, const std::vector<Edge>& edges) {
  auto cycles = all_simple_cycles(n, edges);
  std::stable_sort(cycles.begin(), cycles.end(),
                   [](const EdgeBits& a, const EdgeBits& b) { return a.count() < b.count(); });
  std::vector<EdgeBits> basis;  // reduced rows keyed by their lowest set bit
  std::vector<std::size_t> lengths;
  for (const auto& c : cycles) {
    EdgeBits v = c;
    for (const auto& b : basis) {
      std::size_t low = 0;
      while (!b[low]) ++low;
      if (v[low]) v ^= b;
    }
    if (v.none()) continue;
    // Keep the basis in echelon form: eliminate v's pivot from earlier rows.
    std::size_t pivot = 0;
    while (!v[pivot]) ++pivot;
    for (auto& b : basis) {
      if (b[pivot]) b ^= v;
    }
    basis.push_back(v);
    lengths.push_back(c.count());
  }
  std::sort(lengths.begin(), lengths.end());
  return lengths;
}

// ---------------------------------------------------------------------------
// Best-split oracle: recompute every candidate split's SSE from scratch.
// ---------------------------------------------------------------------------

inline double sse_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

struct OracleSplit {
  std::size_t feature;
  double threshold;
  double reduction;
};

inline std::optional<OracleSplit> oracle_best_split(const Matrix& x, const std::vector<double>& y,
                                                    std::size_t min_leaf = 1) {
  const double total = sse_of(y);
  std::optional<OracleSplit> best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.rows(); ++i) values.push_back(x(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
      const double mid = values[t] + (values[t + 1] - values[t]) / 2.0;
      const double threshold = mid < values[t + 1] ? mid : values[t];
      std::vector<double> left;
      std::vector<double> right;
      for (std::size_t i = 0; i < x.rows(); ++i) (x(i, f) <= threshold ? left : right).push_back(y[i]);
      if (left.size() < min_leaf || right.size() < min_leaf) continue;
      const double red = total - sse_of(left) - sse_of(right);
      // Same tie rule as the library: a later candidate must be clearly larger.
      if (!best ? red > 0.0 : red > best->reduction + 1e-9 * (1.0 + std::abs(best->reduction))) {
        best = OracleSplit{f, threshold, red};
      }
    }
  }
  if (best && !(best->reduction > 1e-12 * (1.0 + total))) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

inline double normal(SplitMix64& rng);

// Small regression problem; even seeds use coarse integer grids so that
// duplicate values and tied reductions occur.
struct SplitProblem {
  Matrix x;
  std::vector<double> y;
};

inline SplitProblem random_split_problem(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t n = 2 + rng.below(14);
  const std::size_t d = 1 + rng.below(4);
  const bool coarse = seed % 2 == 0;
  SplitProblem p{Matrix(n, d), {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) p.x(i, j) = coarse ? static_cast<double>(rng.below(4)) : normal(rng);
    p.y.push_back(coarse ? static_cast<double>(rng.below(3)) : normal(rng));
  }
  return p;
}

inline double normal(SplitMix64& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Noiseless linear multi-channel data: every material has every channel,
// y_c = w_c . x with x ~ N(0, 1).
// Noiseless y_c = w_c . x with Gaussian weights. Features are standard
// normal, or uniform on [-1, 1] when `uniform` is set.
inline SampleTable linear_dataset(std::size_t materials, std::size_t dim, std::size_t channels, std::uint64_t seed,
                                  bool uniform = false) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> w(channels, std::vector<double>(dim));
  for (auto& row : w) {
    for (double& v : row) v = normal(rng);
  }
  SampleTable t;
  t.n_channels = channels;
  t.x = Matrix(0, dim);
  for (std::size_t m = 0; m < materials; ++m) {
    std::vector<double> x(dim);
    for (double& v : x) v = uniform ? 2.0 * rng.uniform() - 1.0 : normal(rng);
    for (std::size_t c = 0; c < channels; ++c) {
      double y = 0.0;
      for (std::size_t j = 0; j < dim; ++j) y += w[c][j] * x[j];
      char id[32];
      std::snprintf(id, sizeof id, "M%03zu", m);
      t.append(x, c, y, id);
    }
  }
  return t;
}

// The first n untransformed channels of the default registry.
inline PropertyRegistry plain_registry(std::size_t n) {
  const std::vector<const char*> props = {"det_velocity", "det_pressure", "heat_detonation", "gurney_energy"};
  std::vector<PropertyChannel> channels;
  for (std::size_t c = 0; c < n; ++c) channels.push_back({props[c], Fidelity::Calc, "u", Transform::None});
  return PropertyRegistry(std::move(channels));
}

// Fresh empty directory under the system temp dir.
// Random small net and batch, compared parameter by parameter against
// central finite differences of loss(). Returns the worst relative error.
// Nonzero biases keep pre-activations off the rectifier kink at exactly 0.
inline void randomize_biases(MTNet& net, SplitMix64& rng) {
  for (auto& layer : net.layers()) {
    for (double& b : layer.bias) b = 0.2 * normal(rng);
  }
}

struct GradientCase {
  MTNet net;
  SampleTable batch;
};

inline GradientCase random_gradient_case(std::uint64_t seed) {
  SplitMix64 rng(seed);
  MTNetConfig cfg;
  cfg.input_dim = 1 + rng.below(5);
  const std::size_t depth = 1 + rng.below(3);
  for (std::size_t l = 0; l < depth; ++l) cfg.hidden_sizes.push_back(1 + rng.below(8));
  cfg.selector_dim = rng.below(2) == 0 ? 0 : 1 + rng.below(4);
  cfg.selector_layer_index = 1 + rng.below(depth);
  cfg.l2_penalty = rng.below(2) == 0 ? 0.0 : 0.1 * rng.uniform();
  cfg.seed = rng.next();
  MTNet net = init_network(cfg);
  randomize_biases(net, rng);
  SampleTable batch;
  batch.n_channels = std::max<std::size_t>(cfg.selector_dim, 1);
  batch.x = Matrix(0, cfg.input_dim);
  const std::size_t n = 1 + rng.below(6);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(cfg.input_dim);
    for (double& v : x) v = normal(rng);
    batch.append(x, rng.below(batch.n_channels), normal(rng), "S" + std::to_string(i));
  }
  return {std::move(net), std::move(batch)};
}

// The floor keeps gradients near zero (dead units under a tiny l2 term) from
// amplifying finite-difference rounding noise of order 1e-10.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

inline double max_gradient_error(const GradientCase& c, double h = 1e-6) {
  const Gradients g = gradients(c.net, c.batch);
  MTNet net = c.net;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss(net, c.batch);
    param = saved - h;
    const double down = loss(net, c.batch);
    param = saved;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2 * h)));
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    for (std::size_t k = 0; k < layer.weights.size(); ++k) check(layer.weights[k], g.weights[l][k]);
    for (std::size_t k = 0; k < layer.bias.size(); ++k) check(layer.bias[k], g.bias[l][k]);
  }
  return worst;
}

// y = x on four points.
inline SampleTable identity_toy() {
  SampleTable t;
  t.n_channels = 1;
  t.x = Matrix(0, 1);
  for (double v : {-1.0, -0.3, 0.4, 1.0}) t.append(std::vector<double>{v}, 0, v, "P" + std::to_string(t.size()));
  return t;
}

// Dataset CSV over the corpus covering every default channel. Values are
// smooth functions of the molecular formula; a few (material, channel)
// cells are left empty and two materials have no density.
inline void write_fixture_dataset(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "material_id,smiles,property,fidelity,value,density\n";
  const auto& mols = corpus();
  const auto registry = default_registry();
  for (std::size_t i = 0; i < mols.size(); ++i) {
    const auto f = molecular_formula(parse_smiles(mols[i].smiles));
    const double density = 1.0 + 0.02 * f.n_O + 0.015 * f.n_N + 0.01 * f.n_C;
    const double ob = oxygen_balance(f);
    for (std::size_t c = 0; c < registry.size(); ++c) {
      if ((i + 3 * c) % 11 == 0) continue;
      const auto& ch = registry.at(c);
      const double calc = ch.fidelity == Fidelity::Calc ? 1.03 : 1.0;
      double v = 0.0;
      if (ch.property == "det_velocity") v = calc * (4.0 + 0.05 * ob + 1.5 * density);
      if (ch.property == "det_pressure") v = calc * (5.0 + 0.3 * ob + 8.0 * density);
      if (ch.property == "heat_detonation") v = calc * (3000.0 + 25.0 * ob + 100.0 * f.n_N);
      if (ch.property == "gurney_energy") v = 2500.0 + 15.0 * ob + 40.0 * f.n_O;
      if (ch.property == "impact_h50") v = std::pow(10.0, 2.0 - 0.01 * ob - 0.05 * f.n_N);
      if (ch.property == "impact_e50") v = 5.0 + 0.2 * f.n_C + 0.1 * f.n_H;
      if (ch.property == "heat_form_crystal") v = -50.0 + 20.0 * f.n_N - 10.0 * f.n_O + 5.0 * f.n_C;
      if (ch.property == "heat_sublimation") v = 40.0 + 6.0 * f.n_N + 4.0 * f.n_O + 2.0 * f.n_C;
      if (ch.property == "heat_form_gas") v = -10.0 + 26.0 * f.n_N - 8.0 * f.n_O + 7.0 * f.n_C;
      out << mols[i].name << ',' << mols[i].smiles << ',' << ch.property << ',' << fidelity_name(ch.fidelity) << ','
          << v << ',';
      if (i % 12 != 5) out << density;
      out << '\n';
    }
  }
}

// A grid small enough for end-to-end runs.
inline void write_fast_grid(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << R"({"mtnn": {"hidden_sizes": [[8]], "selector_layer_index": ["last"], "learning_rate": 0.01,
  "batch_size": 16, "l2_penalty": 0.0001, "epochs": 20, "patience": 5},
 "forest": {"n_trees": 8, "max_depth": 6, "min_samples_leaf": 1}})";
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("emtk_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace emtk::testing
