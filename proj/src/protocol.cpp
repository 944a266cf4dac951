#include "emtk/protocol.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <tuple>

#include "emtk/error.hpp"
#include "emtk/parallel.hpp"
#include "emtk/rng.hpp"
#include "emtk/split.hpp"
#include "emtk/standardizer.hpp"
#include "emtk/train.hpp"

namespace emtk {

std::string_view family_name(ModelFamily f) noexcept {
  switch (f) {
    case ModelFamily::StRf: return "st-rf";
    case ModelFamily::StNn: return "st-nn";
    case ModelFamily::MtNn: return "mt-nn";
  }
  return "";
}

std::optional<ModelFamily> family_from_name(std::string_view name) noexcept {
  if (name == "st-rf") return ModelFamily::StRf;
  if (name == "st-nn") return ModelFamily::StNn;
  if (name == "mt-nn") return ModelFamily::MtNn;
  return std::nullopt;
}

std::string_view density_label(bool density) noexcept {
  return density ? "(density + molecular descriptors)" : "(molecular descriptors only)";
}

nlohmann::json ProtocolConfig::to_json() const {
  return {{"seeds", seeds},
          {"k", k},
          {"inner_k", inner_k},
          {"grid", {{"mtnn", nn_grid.to_json()}, {"forest", forest_grid.to_json()}}},
          {"jobs", jobs}};
}

namespace {

// Smallest training part an outer fold can have.
bool nested_cv_feasible(std::size_t n_materials, std::size_t k, std::size_t inner_k) {
  if (n_materials < k) return false;
  const std::size_t largest_fold = (n_materials + k - 1) / k;
  return n_materials - largest_fold >= inner_k;
}

// Refit of the search winner for its mean best epoch count, no validation.
MTNet fit_network(const SampleTable& train_std, const NnSearchResult& search, bool multitask, std::uint64_t seed) {
  const auto& cell = search.cells[search.best];
  auto net = init_network(network_config(cell, train_std.x.cols(), multitask ? train_std.n_channels : 0, seed));
  const auto tc = train_config(cell, search.refit_epochs, 0, derive_seed(seed, 1));
  return train(std::move(net), train_std, nullptr, tc).net;
}

std::vector<double> fit_and_predict(ModelFamily family, const SampleTable& train_part, const SampleTable& test_part,
                                    const ProtocolConfig& config, std::uint64_t seed) {
  std::vector<double> out;
  if (family == ModelFamily::StRf) {
    const auto search = grid_search_forest(config.forest_grid, train_part, config.inner_k, seed, 1);
    const auto forest =
        fit_forest(train_part.x, train_part.y, forest_config(search.cells[search.best], derive_seed(seed, search.cells.size())));
    for (std::size_t i = 0; i < test_part.size(); ++i) out.push_back(forest.predict(test_part.x.row(i)));
    return out;
  }
  const bool multitask = family == ModelFamily::MtNn;
  const auto search = grid_search(config.nn_grid, train_part, multitask, config.inner_k, seed, 1);
  const auto scaler = Standardizer::fit(train_part);
  const auto net =
      fit_network(scaler.apply(train_part), search, multitask, derive_seed(seed, search.cells.size()));
  for (std::size_t i = 0; i < test_part.size(); ++i) {
    const auto x = scaler.apply_features(test_part.x.row(i));
    out.push_back(scaler.destandardize(test_part.channel[i], net.forward_channel(x, test_part.channel[i])));
  }
  return out;
}

void score_fold(const SampleTable& test, const std::vector<double>& pred, std::uint64_t seed, std::size_t fold,
                std::vector<FoldMetric>& out) {
  for (std::size_t c = 0; c < test.n_channels; ++c) {
    std::vector<double> p;
    std::vector<double> a;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (test.channel[i] != c) continue;
      p.push_back(pred[i]);
      a.push_back(test.y[i]);
    }
    if (p.empty()) continue;
    FoldMetric m;
    m.seed = seed;
    m.fold = fold;
    m.channel = c;
    m.n_test = p.size();
    m.rmse = rmse(p, a);
    if (p.size() >= 2) {
      try {
        m.r2 = r2(p, a);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConstantTargets) throw;
      }
    }
    out.push_back(m);
  }
}

struct OuterTask {
  std::uint64_t seed;
  std::size_t fold;
  std::size_t group;  // index into the list of CV groups
};

}  // namespace

std::vector<ChannelSummary> summarize(std::vector<FoldMetric>& folds, std::size_t n_channels) {
  std::sort(folds.begin(), folds.end(), [](const FoldMetric& a, const FoldMetric& b) {
    return std::tie(a.seed, a.fold, a.channel) < std::tie(b.seed, b.fold, b.channel);
  });
  std::vector<ChannelSummary> out;
  for (std::size_t c = 0; c < n_channels; ++c) {
    std::vector<double> rm;
    std::vector<double> rr;
    for (const auto& f : folds) {
      if (f.channel != c) continue;
      rm.push_back(f.rmse);
      if (f.r2) rr.push_back(*f.r2);
    }
    if (rm.empty()) continue;
    out.push_back({c, mean_std(rm), mean_std(rr)});
  }
  return out;
}

ProtocolReport run_protocol(ModelFamily family, const SampleTable& data, const PropertyRegistry& registry,
                            const ProtocolConfig& config, const std::string& model_id, bool density) {
  if (config.seeds.empty()) throw Error(ErrorCode::InvalidConfig, "at least one seed is required");
  if (data.size() == 0) throw Error(ErrorCode::EmptyData, "no samples to evaluate");
  ProtocolReport report;
  report.model_id = model_id;
  report.density = density;
  for (const auto& c : registry.channels()) report.channels.push_back(c.name());

  // A CV group is the whole table (multi-task) or one channel's rows.
  std::vector<SampleTable> groups;
  if (family == ModelFamily::MtNn) {
    const auto n = data.materials().size();
    if (!nested_cv_feasible(n, config.k, config.inner_k)) {
      throw Error(ErrorCode::TooFewMaterials,
                  fmt::format("{} materials are too few for {}-fold CV with {}-fold inner search", n, config.k,
                              config.inner_k));
    }
    groups.push_back(data);
  } else {
    for (std::size_t c = 0; c < registry.size(); ++c) {
      const auto rows = data.rows_of_channel(c);
      auto table = data.rows(rows);
      const auto n = table.materials().size();
      if (n == 0) continue;
      if (!nested_cv_feasible(n, config.k, config.inner_k)) {
        report.notes.push_back(fmt::format("{}: skipped, {} materials are too few for nested CV",
                                           registry.at(c).name(), n));
        continue;
      }
      groups.push_back(std::move(table));
    }
  }

  std::vector<OuterTask> tasks;
  std::vector<std::vector<SplitPlan>> plans(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::uint64_t seed : config.seeds) {
      plans[g].push_back(kfold_by_material(groups[g].materials(), config.k, seed));
      for (std::size_t f = 0; f < config.k; ++f) tasks.push_back({seed, f, g});
    }
  }

  std::vector<std::vector<FoldMetric>> results(tasks.size());
  parallel_for(tasks.size(), config.jobs, [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& table = groups[task.group];
    const auto seed_index = static_cast<std::size_t>(
        std::find(config.seeds.begin(), config.seeds.end(), task.seed) - config.seeds.begin());
    const auto& plan = plans[task.group][seed_index];
    const auto test_ids = plan.test_materials(task.fold);
    const auto train_part = table.rows(table.rows_of(test_ids, false));
    const auto test_part = table.rows(table.rows_of(test_ids, true));
    try {
      const auto pred = fit_and_predict(family, train_part, test_part, config, derive_seed(task.seed, task.fold));
      score_fold(test_part, pred, task.seed, task.fold, results[t]);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{} seed {} fold {}: {}", model_id, task.seed, task.fold, e.what()));
    }
  });

  for (auto& r : results) report.folds.insert(report.folds.end(), r.begin(), r.end());
  report.summary = summarize(report.folds, registry.size());
  return report;
}

ModelBundle fit_final_model(ModelFamily family, const SampleTable& data, const PropertyRegistry& registry,
                            const FeatureSchema& schema, const ProtocolConfig& config, std::uint64_t seed,
                            const std::string& model_id) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyData, "no samples to train on");
  ModelBundle bundle;
  bundle.model_id = model_id;
  bundle.schema = schema;
  bundle.kind = family == ModelFamily::StRf ? ModelKind::Forest : ModelKind::Network;
  bundle.training = {{"family", family_name(family)}, {"seed", seed}, {"inner_k", config.inner_k}};

  if (family == ModelFamily::MtNn) {
    const auto search = grid_search(config.nn_grid, data, true, config.inner_k, seed, config.jobs);
    const auto scaler = Standardizer::fit(data);
    bundle.registry = registry;
    bundle.standardizers.push_back(scaler);
    bundle.nets.push_back(
        fit_network(scaler.apply(data), search, true, derive_seed(seed, search.cells.size())));
    bundle.training["cell"] = search.cells[search.best].to_json();
    bundle.training["epochs"] = search.refit_epochs;
    bundle.validate();
    return bundle;
  }

  std::vector<PropertyChannel> kept;
  std::vector<SampleTable> tables;
  nlohmann::json skipped = nlohmann::json::array();
  for (std::size_t c = 0; c < registry.size(); ++c) {
    auto table = data.rows(data.rows_of_channel(c));
    if (table.materials().size() < config.inner_k) {
      skipped.push_back(registry.at(c).name());
      continue;
    }
    kept.push_back(registry.at(c));
    tables.push_back(std::move(table));
  }
  if (kept.empty()) throw Error(ErrorCode::TooFewMaterials, "no channel has enough materials for the inner CV");
  for (std::size_t j = 0; j < tables.size(); ++j) {
    for (auto& ch : tables[j].channel) ch = j;
    tables[j].n_channels = kept.size();
  }
  bundle.registry = PropertyRegistry(kept);
  bundle.training["skipped_channels"] = skipped;
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const std::uint64_t s = derive_seed(seed, j);
    if (family == ModelFamily::StRf) {
      const auto search = grid_search_forest(config.forest_grid, tables[j], config.inner_k, s, config.jobs);
      bundle.forests.push_back(fit_forest(tables[j].x, tables[j].y,
                                          forest_config(search.cells[search.best], derive_seed(s, search.cells.size()))));
      cells.push_back(search.cells[search.best].to_json());
    } else {
      const auto search = grid_search(config.nn_grid, tables[j], false, config.inner_k, s, config.jobs);
      const auto scaler = Standardizer::fit(tables[j]);
      bundle.standardizers.push_back(scaler);
      bundle.nets.push_back(
          fit_network(scaler.apply(tables[j]), search, false, derive_seed(s, search.cells.size())));
      auto cell = search.cells[search.best].to_json();
      cell["epochs"] = search.refit_epochs;
      cells.push_back(cell);
    }
  }
  bundle.training["cells"] = cells;
  bundle.validate();
  return bundle;
}

}  // namespace emtk
