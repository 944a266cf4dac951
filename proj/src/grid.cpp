#include "emtk/grid.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "emtk/error.hpp"
#include "emtk/parallel.hpp"
#include "emtk/rng.hpp"
#include "emtk/split.hpp"
#include "emtk/standardizer.hpp"

namespace emtk {

std::optional<std::size_t> SelectorPosition::resolve(std::size_t hidden_layers) const {
  switch (kind) {
    case Kind::Index:
      if (index >= 1 && index <= hidden_layers) return index;
      return std::nullopt;
    case Kind::Last:
      if (hidden_layers >= 1) return hidden_layers;
      return std::nullopt;
    case Kind::SecondToLast:
      if (hidden_layers >= 2) return hidden_layers - 1;
      return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json SelectorPosition::to_json() const {
  switch (kind) {
    case Kind::Last: return "last";
    case Kind::SecondToLast: return "second_to_last";
    case Kind::Index: break;
  }
  return index;
}

SelectorPosition SelectorPosition::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "last") return {Kind::Last, 0};
    if (s == "second_to_last") return {Kind::SecondToLast, 0};
    throw Error(ErrorCode::InvalidConfig, fmt::format("unknown selector position '{}'", s));
  }
  if (j.is_number_unsigned() && j.get<std::size_t>() >= 1) return {Kind::Index, j.get<std::size_t>()};
  throw Error(ErrorCode::InvalidConfig, fmt::format("bad selector position {}", j.dump()));
}

nlohmann::json NnCell::to_json() const {
  return {{"hidden_sizes", hidden_sizes}, {"selector_layer_index", selector_layer_index},
          {"learning_rate", learning_rate}, {"batch_size", batch_size}, {"l2_penalty", l2_penalty}};
}

std::vector<NnCell> NnGrid::cells(bool multitask) const {
  std::vector<NnCell> out;
  const std::vector<SelectorPosition> single{{SelectorPosition::Kind::Last, 0}};
  const auto& positions = multitask ? selector_positions : single;
  for (const auto& h : hidden_sizes) {
    for (const auto& pos : positions) {
      const auto layer = pos.resolve(h.size());
      if (!layer) continue;
      for (double lr : learning_rates) {
        for (std::size_t bs : batch_sizes) {
          for (double l2 : l2_penalties) out.push_back({h, multitask ? *layer : 1, lr, bs, l2});
        }
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "the network grid has no valid cell");
  return out;
}

nlohmann::json NnGrid::to_json() const {
  nlohmann::json pos = nlohmann::json::array();
  for (const auto& p : selector_positions) pos.push_back(p.to_json());
  return {{"hidden_sizes", hidden_sizes}, {"selector_layer_index", pos}, {"learning_rate", learning_rates},
          {"batch_size", batch_sizes},    {"l2_penalty", l2_penalties},  {"epochs", max_epochs},
          {"patience", patience}};
}

namespace {

template <typename T>
void read_axis(const nlohmann::json& j, const char* key, std::vector<T>& axis) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  axis.clear();
  if (v.is_array()) {
    for (const auto& e : v) axis.push_back(e.get<T>());
  } else {
    axis.push_back(v.get<T>());
  }
  if (axis.empty()) throw Error(ErrorCode::InvalidConfig, fmt::format("grid axis '{}' is empty", key));
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(ErrorCode::InvalidConfig, fmt::format("unknown key '{}' in {} grid", key, where));
  }
}

}  // namespace

NnGrid NnGrid::from_json(const nlohmann::json& j) {
  NnGrid g;
  try {
    reject_unknown(j,
                   {"hidden_sizes", "selector_layer_index", "learning_rate", "batch_size", "l2_penalty", "epochs",
                    "patience"},
                   "mtnn");
    read_axis(j, "hidden_sizes", g.hidden_sizes);
    if (j.contains("selector_layer_index")) {
      const auto& v = j.at("selector_layer_index");
      g.selector_positions.clear();
      if (v.is_array()) {
        for (const auto& e : v) g.selector_positions.push_back(SelectorPosition::from_json(e));
      } else {
        g.selector_positions.push_back(SelectorPosition::from_json(v));
      }
      if (g.selector_positions.empty()) throw Error(ErrorCode::InvalidConfig, "selector axis is empty");
    }
    read_axis(j, "learning_rate", g.learning_rates);
    read_axis(j, "batch_size", g.batch_sizes);
    read_axis(j, "l2_penalty", g.l2_penalties);
    if (j.contains("epochs")) j.at("epochs").get_to(g.max_epochs);
    if (j.contains("patience")) j.at("patience").get_to(g.patience);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("malformed mtnn grid: {}", e.what()));
  }
  return g;
}

nlohmann::json ForestCell::to_json() const {
  return {{"n_trees", n_trees}, {"max_depth", max_depth}, {"min_samples_leaf", min_samples_leaf},
          {"max_features", max_features}};
}

std::vector<ForestCell> ForestGrid::cells() const {
  std::vector<ForestCell> out;
  for (std::size_t t : n_trees) {
    for (std::size_t d : max_depth) {
      for (std::size_t m : min_samples_leaf) {
        for (std::size_t f : max_features) out.push_back({t, d, m, f});
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "the forest grid has no cell");
  return out;
}

nlohmann::json ForestGrid::to_json() const {
  return {{"n_trees", n_trees}, {"max_depth", max_depth}, {"min_samples_leaf", min_samples_leaf},
          {"max_features", max_features}};
}

ForestGrid ForestGrid::from_json(const nlohmann::json& j) {
  ForestGrid g;
  try {
    reject_unknown(j, {"n_trees", "max_depth", "min_samples_leaf", "max_features"}, "forest");
    read_axis(j, "n_trees", g.n_trees);
    read_axis(j, "max_depth", g.max_depth);
    read_axis(j, "min_samples_leaf", g.min_samples_leaf);
    read_axis(j, "max_features", g.max_features);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("malformed forest grid: {}", e.what()));
  }
  return g;
}

nlohmann::json GridFile::to_json() const { return {{"mtnn", nn.to_json()}, {"forest", forest.to_json()}}; }

GridFile GridFile::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "grid file must hold a JSON object");
  reject_unknown(j, {"mtnn", "forest"}, "top-level");
  GridFile g;
  if (j.contains("mtnn")) g.nn = NnGrid::from_json(j.at("mtnn"));
  if (j.contains("forest")) g.forest = ForestGrid::from_json(j.at("forest"));
  return g;
}

GridFile GridFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open grid file '{}'", path));
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("grid file '{}' is not valid JSON: {}", path, e.what()));
  }
}

MTNetConfig network_config(const NnCell& cell, std::size_t input_dim, std::size_t selector_dim, std::uint64_t seed) {
  MTNetConfig c;
  c.input_dim = input_dim;
  c.selector_dim = selector_dim;
  c.hidden_sizes = cell.hidden_sizes;
  c.selector_layer_index = cell.selector_layer_index;
  c.l2_penalty = cell.l2_penalty;
  c.seed = seed;
  return c;
}

TrainConfig train_config(const NnCell& cell, std::size_t max_epochs, std::size_t patience, std::uint64_t seed) {
  TrainConfig t;
  t.learning_rate = cell.learning_rate;
  t.batch_size = cell.batch_size;
  t.max_epochs = max_epochs;
  t.patience = std::min(patience, max_epochs);
  t.seed = seed;
  return t;
}

ForestConfig forest_config(const ForestCell& cell, std::uint64_t seed) {
  ForestConfig c;
  c.n_trees = cell.n_trees;
  c.max_depth = cell.max_depth;
  c.min_samples_leaf = cell.min_samples_leaf;
  c.max_features = cell.max_features;
  c.seed = seed;
  return c;
}

namespace {

struct InnerFold {
  SampleTable train;
  SampleTable val;
};

std::vector<InnerFold> inner_folds(const SampleTable& data, std::size_t k, std::uint64_t seed) {
  const auto plan = kfold_by_material(data.materials(), k, seed);
  std::vector<InnerFold> folds;
  for (std::size_t f = 0; f < k; ++f) {
    const auto test = plan.test_materials(f);
    const auto tr = data.rows_of(test, false);
    const auto va = data.rows_of(test, true);
    folds.push_back({data.rows(tr), data.rows(va)});
  }
  return folds;
}

// Mean over channels present in `val` of the per-channel RMSE.
template <typename Predict>
double channel_mean_rmse(const SampleTable& val, Predict predict) {
  std::vector<double> sse(val.n_channels, 0.0);
  std::vector<std::size_t> count(val.n_channels, 0);
  for (std::size_t i = 0; i < val.size(); ++i) {
    const double r = predict(i) - val.y[i];
    sse[val.channel[i]] += r * r;
    ++count[val.channel[i]];
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < val.n_channels; ++c) {
    if (count[c] == 0) continue;
    sum += std::sqrt(sse[c] / static_cast<double>(count[c]));
    ++present;
  }
  return sum / static_cast<double>(present);
}

Error with_cell(const Error& e, std::size_t cell, const nlohmann::json& desc) {
  return Error(e.code(), fmt::format("grid cell {} {}: {}", cell, desc.dump(), e.what()));
}

}  // namespace

NnSearchResult grid_search(const NnGrid& grid, const SampleTable& data, bool multitask, std::size_t inner_k,
                           std::uint64_t seed, std::size_t jobs) {
  NnSearchResult result;
  result.cells = grid.cells(multitask);
  const auto folds = inner_folds(data, inner_k, seed);
  const std::size_t n_cells = result.cells.size();
  std::vector<double> score(n_cells * inner_k, 0.0);
  std::vector<double> epoch(n_cells * inner_k, 0.0);

  parallel_for(n_cells * inner_k, jobs, [&](std::size_t task) {
    const std::size_t c = task / inner_k;
    const std::size_t f = task % inner_k;
    const auto& cell = result.cells[c];
    try {
      const auto& fold = folds[f];
      const auto scaler = Standardizer::fit(fold.train);
      const auto tr = scaler.apply(fold.train);
      const auto va = scaler.apply(fold.val);
      const std::uint64_t net_seed = derive_seed(derive_seed(seed, c), f);
      auto net = init_network(network_config(cell, data.x.cols(), multitask ? data.n_channels : 0, net_seed));
      const auto trained =
          train(std::move(net), tr, &va, train_config(cell, grid.max_epochs, grid.patience, derive_seed(net_seed, 1)));
      score[task] = channel_mean_rmse(va, [&](std::size_t i) {
        return trained.net.forward_channel(va.x.row(i), va.channel[i]);
      });
      epoch[task] = static_cast<double>(trained.best_epoch);
    } catch (const Error& e) {
      throw with_cell(e, c, cell.to_json());
    }
  });

  for (std::size_t c = 0; c < n_cells; ++c) {
    double s = 0.0;
    double e = 0.0;
    for (std::size_t f = 0; f < inner_k; ++f) {
      s += score[c * inner_k + f];
      e += epoch[c * inner_k + f];
    }
    result.scores.push_back(s / static_cast<double>(inner_k));
    result.mean_best_epoch.push_back(e / static_cast<double>(inner_k));
    if (result.scores[c] < result.scores[result.best]) result.best = c;
  }
  result.refit_epochs = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(result.mean_best_epoch[result.best])));
  return result;
}

ForestSearchResult grid_search_forest(const ForestGrid& grid, const SampleTable& data, std::size_t inner_k,
                                      std::uint64_t seed, std::size_t jobs) {
  ForestSearchResult result;
  result.cells = grid.cells();
  const auto folds = inner_folds(data, inner_k, seed);
  const std::size_t n_cells = result.cells.size();
  std::vector<double> score(n_cells * inner_k, 0.0);

  parallel_for(n_cells * inner_k, jobs, [&](std::size_t task) {
    const std::size_t c = task / inner_k;
    const std::size_t f = task % inner_k;
    const auto& cell = result.cells[c];
    try {
      const auto& fold = folds[f];
      const auto forest = fit_forest(fold.train.x, fold.train.y, forest_config(cell, derive_seed(derive_seed(seed, c), f)));
      score[task] = channel_mean_rmse(fold.val, [&](std::size_t i) { return forest.predict(fold.val.x.row(i)); });
    } catch (const Error& e) {
      throw with_cell(e, c, cell.to_json());
    }
  });

  for (std::size_t c = 0; c < n_cells; ++c) {
    double s = 0.0;
    for (std::size_t f = 0; f < inner_k; ++f) s += score[c * inner_k + f];
    result.scores.push_back(s / static_cast<double>(inner_k));
    if (result.scores[c] < result.scores[result.best]) result.best = c;
  }
  return result;
}

}  // namespace emtk
