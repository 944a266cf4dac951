#include "emtk/cli.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "emtk/correlation.hpp"
#include "emtk/csv.hpp"
#include "emtk/dataset.hpp"
#include "emtk/error.hpp"
#include "emtk/grid.hpp"
#include "emtk/hash.hpp"
#include "emtk/model_io.hpp"
#include "emtk/protocol.hpp"
#include "emtk/report.hpp"
#include "emtk/samples.hpp"
#include "emtk/schema.hpp"
#include "emtk/smiles.hpp"

namespace emtk {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data;
  std::string registry;
  std::string grid;
  std::string out;
  std::string input;
  std::string schema;
  std::string model;
  std::string by;
  std::vector<std::string> smiles;
  std::string subset;
  bool density = false;
  bool no_density = false;
  std::optional<double> density_value;
  std::string seeds = "0,1,2";
  std::size_t folds = 5;
  std::size_t inner_folds = 5;
  std::size_t jobs = 1;
  std::string dedupe = "error";
  std::string models = "st-rf,st-nn,mt-nn";
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || s[0] == '-') throw UsageError(fmt::format("bad seed '{}'", s));
    if (std::find(seeds.begin(), seeds.end(), v) != seeds.end()) throw UsageError(fmt::format("seed {} repeated", v));
    seeds.push_back(v);
  }
  if (seeds.empty()) throw UsageError("--seeds needs at least one value");
  return seeds;
}

// Subset ids; "all" maps to 6.
std::vector<int> parse_subsets(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    if (s == "all") {
      out.push_back(6);
    } else if (s.size() == 1 && s[0] >= '1' && s[0] <= '6') {
      out.push_back(s[0] - '0');
    } else {
      throw Error(ErrorCode::UnknownSubset, fmt::format("subset '{}' is not one of 1..6 or all", s));
    }
  }
  if (out.empty()) throw UsageError("--subset needs at least one value");
  return out;
}

std::vector<ModelFamily> parse_families(const std::string& text) {
  std::vector<ModelFamily> out;
  for (const auto& s : split_list(text)) {
    const auto f = family_from_name(s);
    if (!f) throw UsageError(fmt::format("unknown model family '{}' (expected st-rf, st-nn, mt-nn)", s));
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  if (out.empty()) throw UsageError("--models needs at least one value");
  return out;
}

std::string mt_model_id(int subset) { return subset == 6 ? "MT-NN-all" : fmt::format("MT-NN-sub{}", subset); }

std::string st_model_id(ModelFamily f) { return f == ModelFamily::StRf ? "ST-RF" : "ST-NN"; }

// Both modes unless one flag is given.
std::vector<bool> density_modes(const Options& o) {
  if (o.density && o.no_density) throw UsageError("--density and --no-density are exclusive");
  if (o.density) return {true};
  if (o.no_density) return {false};
  return {false, true};
}

PropertyRegistry registry_of(const Options& o) {
  return o.registry.empty() ? default_registry() : PropertyRegistry::load(o.registry);
}

DedupePolicy dedupe_of(const Options& o) {
  if (o.dedupe == "error") return DedupePolicy::Error;
  if (o.dedupe == "mean") return DedupePolicy::Mean;
  throw UsageError(fmt::format("--dedupe must be error or mean, got '{}'", o.dedupe));
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(fmt::format("{} is required", flag));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path out_dir(const Options& o) {
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing '{}'", path.string()));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

FeatureSchema schema_for(const Dataset& dataset, bool density) {
  std::vector<MolGraph> graphs;
  for (const auto& m : dataset.materials()) graphs.push_back(m.graph);
  return fit_schema(std::span<const MolGraph>(graphs), density);
}

struct LoadedData {
  Dataset dataset;
  std::string checksum;
};

LoadedData load_data(const Options& o) {
  require(o.data, "--data");
  const auto bytes = read_file(o.data);
  std::istringstream in(bytes);
  LoadedData d{load_records(in, registry_of(o), dedupe_of(o)), fmt::format("{:016x}", fnv1a64(bytes))};
  if (d.dataset.records().empty()) throw Error(ErrorCode::EmptyData, fmt::format("'{}' holds no records", o.data));
  return d;
}

nlohmann::json run_manifest(const std::string& command, const std::vector<std::string>& args, const Options& o,
                            const LoadedData& data, const nlohmann::json& config,
                            const std::chrono::system_clock::time_point& started) {
  const auto finished = std::chrono::system_clock::now();
  const auto stamp = [](std::chrono::system_clock::time_point t) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
  };
  nlohmann::json m;
  m["tool"] = "emtk";
  m["version"] = EMTK_VERSION;
  m["command"] = command;
  m["arguments"] = args;
  m["config"] = config;
  m["seeds"] = parse_seeds(o.seeds);
  m["dataset"] = {{"path", o.data}, {"fnv1a64", data.checksum}, {"records", data.dataset.records().size()},
                  {"materials", data.dataset.materials().size()}};
  m["registry"] = data.dataset.registry().to_json();
  m["wall_clock"] = {{"started", stamp(started)},
                     {"finished", stamp(finished)},
                     {"seconds", std::chrono::duration<double>(finished - started).count()}};
  return m;
}

ProtocolConfig protocol_config(const Options& o) {
  ProtocolConfig c;
  c.seeds = parse_seeds(o.seeds);
  c.k = o.folds;
  c.inner_k = o.inner_folds;
  c.jobs = std::max<std::size_t>(1, o.jobs);
  if (!o.grid.empty()) {
    const auto g = GridFile::load(o.grid);
    c.nn_grid = g.nn;
    c.forest_grid = g.forest;
  }
  return c;
}

// Candidate molecules: material_id,smiles[,density].
struct Candidate {
  std::string id;
  std::string smiles;
  std::optional<double> density;
};

std::vector<Candidate> read_candidates(const std::string& path) {
  const auto table = read_csv_file(path);
  const auto id_col = table.column("material_id");
  const auto smiles_col = table.column("smiles");
  const auto density_col = table.column("density");
  if (id_col == std::string::npos || smiles_col == std::string::npos) {
    throw Error(ErrorCode::ParseFailure, fmt::format("'{}' needs material_id and smiles columns", path));
  }
  std::vector<Candidate> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Candidate c{row[id_col], row[smiles_col], std::nullopt};
    if (density_col != std::string::npos && !row[density_col].empty()) {
      try {
        std::size_t used = 0;
        c.density = std::stod(row[density_col], &used);
        if (used != row[density_col].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseFailure,
                    fmt::format("row {}: bad density '{}'", table.line_numbers[r], row[density_col]));
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> featurize_smiles(const std::string& id, const std::string& smiles, const FeatureSchema& schema,
                                     std::optional<double> density) {
  try {
    return featurize(parse_smiles(smiles), schema, schema.include_density() ? density : std::nullopt).values;
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", id, e.what()));
  }
}

// --------------------------------------------------------------------------

int cmd_featurize(const Options& o, std::ostream& log) {
  if (o.input.empty() == o.data.empty()) throw UsageError("featurize needs exactly one of --input or --data");
  if (o.density && o.no_density) throw UsageError("--density and --no-density are exclusive");
  std::vector<Candidate> mols;
  if (!o.input.empty()) {
    mols = read_candidates(o.input);
  } else {
    const auto d = load_data(o);
    for (const auto& m : d.dataset.materials()) {
      Candidate c{m.id, m.smiles, std::nullopt};
      for (const auto& r : d.dataset.records()) {
        if (r.material_id == m.id && r.density) {
          c.density = r.density;
          break;
        }
      }
      mols.push_back(std::move(c));
    }
  }
  FeatureSchema schema;
  if (!o.schema.empty()) {
    schema = FeatureSchema::from_json(nlohmann::json::parse(read_file(o.schema)));
  } else {
    std::vector<NamedSmiles> named;
    for (const auto& m : mols) named.push_back({m.id, m.smiles});
    schema = fit_schema(std::span<const NamedSmiles>(named), o.density);
  }
  std::ostringstream csv;
  csv << "material_id";
  for (const auto& n : schema.names()) csv << ',' << csv_escape(n);
  csv << '\n';
  for (const auto& m : mols) {
    if (schema.include_density() && !m.density) {
      throw Error(ErrorCode::MissingDensity, fmt::format("{}: the schema includes density but none was given", m.id));
    }
    const auto v = featurize_smiles(m.id, m.smiles, schema, m.density);
    csv << csv_escape(m.id);
    for (double x : v) csv << ',' << num(x);
    csv << '\n';
  }
  const auto dir = out_dir(o);
  write_text(dir / "features.csv", csv.str());
  write_text(dir / "schema.json", schema.to_json().dump(2) + "\n");
  log << fmt::format("featurized {} molecules into {} features\n", mols.size(), schema.size());
  return 0;
}

int cmd_correlate(const Options& o, std::ostream& log) {
  const auto d = load_data(o);
  const auto m = pearson_matrix(d.dataset);
  const auto dir = out_dir(o);
  std::ostringstream r;
  std::ostringstream n;
  write_correlation_csv(r, m);
  write_overlap_csv(n, m);
  write_text(dir / "correlation.csv", r.str());
  write_text(dir / "overlap.csv", n.str());
  log << fmt::format("wrote {}x{} correlation matrices\n", m.channels.size(), m.channels.size());
  return 0;
}

struct Job {
  ModelFamily family;
  std::string model_id;
  Dataset dataset;
};

// Multi-task jobs per subset; single-task jobs over the union of subset
// channels, since a single-task model does not depend on its neighbours.
std::vector<Job> plan_jobs(const Dataset& dataset, const Options& o, const std::string& default_subset) {
  const auto subsets = parse_subsets(o.subset.empty() ? default_subset : o.subset);
  const auto families = parse_families(o.models);
  std::vector<Job> jobs;
  std::set<std::size_t> union_channels;
  for (int s : subsets) {
    for (auto c : subset_channels(dataset.registry(), s)) union_channels.insert(c);
  }
  for (auto f : families) {
    if (f == ModelFamily::MtNn) {
      for (int s : subsets) {
        auto ds = subset_filter(dataset, s).without_empty_channels();
        if (ds.records().empty()) throw Error(ErrorCode::EmptyData, fmt::format("subset {} has no records", s));
        jobs.push_back({f, mt_model_id(s), std::move(ds)});
      }
    } else {
      auto ds = dataset.with_channels({union_channels.begin(), union_channels.end()}).without_empty_channels();
      if (ds.records().empty()) throw Error(ErrorCode::EmptyData, "selected subsets have no records");
      jobs.push_back({f, st_model_id(f), std::move(ds)});
    }
  }
  return jobs;
}

SampleTable samples_for(const Job& job, const FeatureSchema& schema, bool density, std::ostream& log) {
  auto built = build_samples(job.dataset, FeatureSchema(schema.vocabulary(), density));
  if (built.dropped_without_density > 0) {
    log << fmt::format("{}: dropped {} records without density\n", job.model_id, built.dropped_without_density);
  }
  if (built.table.size() == 0) throw Error(ErrorCode::EmptyData, fmt::format("{}: no usable records", job.model_id));
  return std::move(built.table);
}

int cmd_evaluate(const std::vector<std::string>& args, const Options& o, std::ostream& log) {
  const auto started = std::chrono::system_clock::now();
  const auto d = load_data(o);
  const auto config = protocol_config(o);
  const auto modes = density_modes(o);
  const auto jobs = plan_jobs(d.dataset, o, "all");
  std::vector<ProtocolReport> reports;
  nlohmann::json schemas = nlohmann::json::array();
  for (bool density : modes) {
    const auto schema = schema_for(d.dataset, density);
    schemas.push_back(schema.to_json());
    for (const auto& job : jobs) {
      log << fmt::format("evaluating {} {}\n", job.model_id, density_label(density));
      const auto samples = samples_for(job, schema, density, log);
      reports.push_back(run_protocol(job.family, samples, job.dataset.registry(), config, job.model_id, density));
    }
  }
  const auto dir = out_dir(o);
  write_reports(dir.string(), reports);
  auto manifest = run_manifest("evaluate", args, o, d, config.to_json(), started);
  manifest["schemas"] = schemas;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  log << fmt::format("wrote {} reports to {}\n", reports.size(), dir.string());
  return 0;
}

int cmd_tune(const std::vector<std::string>& args, const Options& o, std::ostream& log) {
  const auto started = std::chrono::system_clock::now();
  const auto d = load_data(o);
  const auto config = protocol_config(o);
  const bool density = o.density && !o.no_density;
  if (o.density && o.no_density) throw UsageError("--density and --no-density are exclusive");
  const auto jobs = plan_jobs(d.dataset, o, "all");
  const auto schema = schema_for(d.dataset, density);
  const std::uint64_t seed = config.seeds.front();
  std::ostringstream csv;
  csv << "model,channel,cell,config,score,mean_best_epoch,winner\n";
  nlohmann::json winners = nlohmann::json::array();
  for (const auto& job : jobs) {
    const auto samples = samples_for(job, schema, density, log);
    const auto& reg = job.dataset.registry();
    // Single-task families tune one channel at a time.
    std::vector<std::optional<std::size_t>> targets;
    if (job.family == ModelFamily::MtNn) {
      targets.push_back(std::nullopt);
    } else {
      for (std::size_t c = 0; c < reg.size(); ++c) targets.push_back(c);
    }
    for (const auto& target : targets) {
      const auto table = target ? samples.rows(samples.rows_of_channel(*target)) : samples;
      const std::string channel = target ? reg.at(*target).name() : "all";
      log << fmt::format("tuning {} on {}\n", job.model_id, channel);
      if (job.family == ModelFamily::StRf) {
        const auto r = grid_search_forest(config.forest_grid, table, config.inner_k, seed, config.jobs);
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
          csv << job.model_id << ',' << csv_escape(channel) << ',' << i << ',' << csv_escape(r.cells[i].to_json().dump())
              << ',' << num(r.scores[i]) << ",," << (i == r.best ? "true" : "false") << '\n';
        }
        winners.push_back({{"model", job.model_id}, {"channel", channel}, {"cell", r.cells[r.best].to_json()},
                           {"score", r.scores[r.best]}});
      } else {
        const bool mt = job.family == ModelFamily::MtNn;
        const auto r = grid_search(config.nn_grid, table, mt, config.inner_k, seed, config.jobs);
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
          csv << job.model_id << ',' << csv_escape(channel) << ',' << i << ',' << csv_escape(r.cells[i].to_json().dump())
              << ',' << num(r.scores[i]) << ',' << num(r.mean_best_epoch[i]) << ',' << (i == r.best ? "true" : "false")
              << '\n';
        }
        winners.push_back({{"model", job.model_id}, {"channel", channel}, {"cell", r.cells[r.best].to_json()},
                           {"score", r.scores[r.best]}, {"refit_epochs", r.refit_epochs}});
      }
    }
  }
  const auto dir = out_dir(o);
  write_text(dir / "grid.csv", csv.str());
  write_text(dir / "winner.json", winners.dump(2) + "\n");
  auto manifest = run_manifest("tune", args, o, d, config.to_json(), started);
  manifest["schema"] = schema.to_json();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_train(const std::vector<std::string>& args, const Options& o, std::ostream& log) {
  const auto started = std::chrono::system_clock::now();
  const auto d = load_data(o);
  const auto config = protocol_config(o);
  const auto modes = density_modes(o);
  const auto jobs = plan_jobs(d.dataset, o, "all");
  const auto dir = out_dir(o);
  nlohmann::json models = nlohmann::json::array();
  for (bool density : modes) {
    const auto schema = schema_for(d.dataset, density);
    for (const auto& job : jobs) {
      log << fmt::format("training {} {}\n", job.model_id, density_label(density));
      const auto samples = samples_for(job, schema, density, log);
      const auto bundle = fit_final_model(job.family, samples, job.dataset.registry(), schema, config,
                                          config.seeds.front(), job.model_id);
      const auto name = fmt::format("{}-{}.{}", job.model_id, density ? "density" : "descriptors",
                                    bundle.kind == ModelKind::Forest ? "emrf" : "emmt");
      save_model(bundle, (dir / name).string());
      models.push_back({{"file", name}, {"model", job.model_id}, {"density", density}, {"training", bundle.training}});
    }
  }
  auto manifest = run_manifest("train", args, o, d, config.to_json(), started);
  manifest["models"] = models;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

std::string predictions_header(const ModelBundle& model) {
  std::string h;
  for (const auto& c : model.registry.channels()) h += "," + csv_escape(c.name());
  return h;
}

int cmd_predict(const Options& o, std::ostream& out) {
  require(o.model, "--model");
  if (o.smiles.empty()) throw UsageError("--smiles is required");
  const auto model = load_model(o.model);
  if (model.schema.include_density() && !o.density_value) {
    throw Error(ErrorCode::MissingDensity, "this model needs --density");
  }
  if (!model.schema.include_density() && o.density_value) {
    throw Error(ErrorCode::UnexpectedDensity, "this model was trained without density");
  }
  out << "smiles" << predictions_header(model) << '\n';
  for (const auto& s : o.smiles) {
    const auto x = featurize_smiles(s, s, model.schema, o.density_value);
    out << csv_escape(s);
    for (const auto& p : predict_matrix(model, x)) out << ',' << num(p.value);
    out << '\n';
  }
  return 0;
}

int cmd_screen(const Options& o, std::ostream& out) {
  require(o.model, "--model");
  require(o.input, "--input");
  require(o.by, "--by");
  const auto model = load_model(o.model);
  const auto target = model.registry.index_of(o.by);
  struct Ranked {
    Candidate c;
    std::vector<ChannelPrediction> p;
  };
  std::vector<Ranked> ranked;
  for (auto& c : read_candidates(o.input)) {
    if (model.schema.include_density() && !c.density) {
      throw Error(ErrorCode::MissingDensity, fmt::format("{}: this model needs a density", c.id));
    }
    const auto x = featurize_smiles(c.id, c.smiles, model.schema, c.density);
    auto p = predict_matrix(model, x);
    ranked.push_back({std::move(c), std::move(p)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.p[target].value != b.p[target].value) return a.p[target].value > b.p[target].value;
    return a.c.id < b.c.id;
  });
  std::ostringstream csv;
  csv << "rank,material_id,smiles" << predictions_header(model) << '\n';
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    csv << i + 1 << ',' << csv_escape(ranked[i].c.id) << ',' << csv_escape(ranked[i].c.smiles);
    for (const auto& p : ranked[i].p) csv << ',' << num(p.value);
    csv << '\n';
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_text(o.out, csv.str());
  }
  return 0;
}

// --------------------------------------------------------------------------

void add_data_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "Dataset CSV (material_id,smiles,property,fidelity,value,density)");
  cmd->add_option("--registry", o.registry, "Registry JSON; defaults to the built-in channel list");
  cmd->add_option("--dedupe", o.dedupe, "Duplicate (material, channel) rows: error or mean");
}

void add_run_flags(CLI::App* cmd, Options& o, bool both_density_flags) {
  add_data_flags(cmd, o);
  cmd->add_option("--subset", o.subset, "Channel subsets: 1..6 or all, comma separated");
  cmd->add_option("--models", o.models, "Model families: st-rf,st-nn,mt-nn");
  cmd->add_option("--seeds", o.seeds, "Comma-separated seeds");
  cmd->add_option("--grid", o.grid, "Grid JSON file");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--density", o.density, both_density_flags ? "Only the density + descriptors mode"
                                                            : "Include density as a feature");
  cmd->add_flag("--no-density", o.no_density, "Only the descriptors-only mode");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Multi-task property models for energetic materials", "emtk"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", EMTK_VERSION);

  auto* featurize_cmd = app.add_subcommand("featurize", "Descriptor vectors and schema manifest");
  featurize_cmd->add_option("--input", o.input, "CSV with material_id,smiles[,density]");
  add_data_flags(featurize_cmd, o);
  featurize_cmd->add_option("--schema", o.schema, "Reuse an existing schema manifest");
  featurize_cmd->add_flag("--density", o.density, "Append density as the last feature");
  featurize_cmd->add_flag("--no-density", o.no_density, "Descriptors only (default)");
  featurize_cmd->add_option("--out", o.out, "Output directory");

  auto* correlate_cmd = app.add_subcommand("correlate", "Pairwise Pearson matrix between channels");
  add_data_flags(correlate_cmd, o);
  correlate_cmd->add_option("--out", o.out, "Output directory");

  auto* tune_cmd = app.add_subcommand("tune", "Grid search with inner cross-validation");
  add_run_flags(tune_cmd, o, false);
  tune_cmd->add_option("--folds", o.inner_folds, "Inner CV folds")->check(CLI::Range(2, 1000));

  auto* train_cmd = app.add_subcommand("train", "Tune and fit final models on all data");
  add_run_flags(train_cmd, o, true);
  train_cmd->add_option("--folds", o.inner_folds, "Inner CV folds")->check(CLI::Range(2, 1000));

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Repeated nested cross-validation and reports");
  add_run_flags(evaluate_cmd, o, true);
  evaluate_cmd->add_option("--folds", o.folds, "Outer CV folds")->check(CLI::Range(2, 1000));
  evaluate_cmd->add_option("--inner-folds", o.inner_folds, "Inner CV folds for the grid search")
      ->check(CLI::Range(2, 1000));

  auto* predict_cmd = app.add_subcommand("predict", "Predict every channel for SMILES strings");
  predict_cmd->add_option("--model", o.model, "Model file");
  predict_cmd->add_option("--smiles", o.smiles, "SMILES (repeatable)");
  predict_cmd->add_option("--density", o.density_value, "Crystal density, g/cm3");

  auto* screen_cmd = app.add_subcommand("screen", "Rank candidates by one predicted channel");
  screen_cmd->add_option("--model", o.model, "Model file");
  screen_cmd->add_option("--input", o.input, "CSV with material_id,smiles[,density]");
  screen_cmd->add_option("--by", o.by, "Channel name, e.g. det_velocity:calc");
  screen_cmd->add_option("--out", o.out, "Output CSV (default stdout)");

  std::vector<const char*> argv{"emtk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*featurize_cmd) return cmd_featurize(o, err);
    if (*correlate_cmd) return cmd_correlate(o, err);
    if (*tune_cmd) return cmd_tune(args, o, err);
    if (*train_cmd) return cmd_train(args, o, err);
    if (*evaluate_cmd) return cmd_evaluate(args, o, err);
    if (*predict_cmd) return cmd_predict(o, out);
    if (*screen_cmd) return cmd_screen(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: code=" << error_code_name(e.code()) << " message=" << message << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: code=" << error_code_name(ErrorCode::ParseFailure) << " message=" << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace emtk
