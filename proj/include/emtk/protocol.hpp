#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emtk/grid.hpp"
#include "emtk/metrics.hpp"
#include "emtk/model_io.hpp"
#include "emtk/registry.hpp"
#include "emtk/samples.hpp"

namespace emtk {

enum class ModelFamily { StRf, StNn, MtNn };

std::string_view family_name(ModelFamily f) noexcept;  // "st-rf", "st-nn", "mt-nn"
std::optional<ModelFamily> family_from_name(std::string_view name) noexcept;

// "(molecular descriptors only)" or "(density + molecular descriptors)".
std::string_view density_label(bool density) noexcept;

struct ProtocolConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t k = 5;
  std::size_t inner_k = 5;
  NnGrid nn_grid;
  ForestGrid forest_grid;
  std::size_t jobs = 1;

  nlohmann::json to_json() const;
};

struct FoldMetric {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::size_t channel = 0;
  std::size_t n_test = 0;
  double rmse = 0.0;
  std::optional<double> r2;  // undefined for < 2 points or constant targets
};

struct ChannelSummary {
  std::size_t channel = 0;
  MeanStd rmse;
  MeanStd r2;
};

struct ProtocolReport {
  std::string model_id;  // ST-RF, ST-NN, MT-NN-sub<i>, MT-NN-all
  bool density = false;
  std::vector<std::string> channels;
  std::vector<FoldMetric> folds;         // sorted by (seed, fold, channel)
  std::vector<ChannelSummary> summary;   // channels with at least one fold value
  std::vector<std::string> notes;        // skipped channels and similar
};

// Outer material-level k-fold CV repeated for every seed. Each outer fold
// runs an inner grid search on its training part, refits the winner on the
// whole training part and scores the held-out materials. Metrics are on the
// channel model scale (log10 units for log channels). Single-task families
// run one independent CV per channel over that channel's materials; channels
// with too few materials for the nested CV are skipped with a note.
// Aggregation sorts fold values by (seed, fold) first, so the summary does not
// depend on seed order or worker count.
ProtocolReport run_protocol(ModelFamily family, const SampleTable& data, const PropertyRegistry& registry,
                            const ProtocolConfig& config, const std::string& model_id, bool density);

// Recomputes per-channel summaries from fold values.
std::vector<ChannelSummary> summarize(std::vector<FoldMetric>& folds, std::size_t n_channels);

// Grid search on all of `data`, then refit on all of it. Single-task bundles
// leave out channels with too few materials for the inner CV and list them in
// bundle.training["skipped_channels"].
ModelBundle fit_final_model(ModelFamily family, const SampleTable& data, const PropertyRegistry& registry,
                            const FeatureSchema& schema, const ProtocolConfig& config, std::uint64_t seed,
                            const std::string& model_id);

}  // namespace emtk
