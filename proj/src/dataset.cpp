#include "emtk/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>

#include "emtk/csv.hpp"
#include "emtk/error.hpp"
#include "emtk/smiles.hpp"

namespace emtk {

Dataset::Dataset(PropertyRegistry registry, std::vector<Material> materials, std::vector<Record> records)
    : registry_(std::move(registry)), materials_(std::move(materials)), records_(std::move(records)) {
  std::sort(materials_.begin(), materials_.end(),
            [](const Material& a, const Material& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < materials_.size(); ++i) {
    if (materials_[i].id == materials_[i - 1].id) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("material '{}' listed twice", materials_[i].id));
    }
  }
  std::sort(records_.begin(), records_.end(), [](const Record& a, const Record& b) {
    return a.material_id != b.material_id ? a.material_id < b.material_id : a.channel < b.channel;
  });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.channel >= registry_.size()) {
      throw Error(ErrorCode::UnknownChannel, fmt::format("record channel index {} out of range", r.channel));
    }
    material(r.material_id);
    if (!std::isfinite(r.value) || !std::isfinite(registry_.at(r.channel).forward(r.value))) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("non-finite value for {} / {}", r.material_id, registry_.at(r.channel).name()));
    }
    if (i > 0 && records_[i - 1].material_id == r.material_id && records_[i - 1].channel == r.channel) {
      throw Error(ErrorCode::DuplicateRecord,
                  fmt::format("duplicate record for {} / {}", r.material_id, registry_.at(r.channel).name()));
    }
  }
}

const Material& Dataset::material(const std::string& id) const {
  const auto it = std::lower_bound(materials_.begin(), materials_.end(), id,
                                   [](const Material& m, const std::string& key) { return m.id < key; });
  if (it == materials_.end() || it->id != id) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown material '{}'", id));
  }
  return *it;
}

std::vector<std::string> Dataset::material_ids() const {
  std::vector<std::string> ids;
  ids.reserve(materials_.size());
  for (const auto& m : materials_) ids.push_back(m.id);
  return ids;
}

std::vector<std::size_t> Dataset::channel_counts() const {
  std::vector<std::size_t> counts(registry_.size(), 0);
  for (const auto& r : records_) ++counts[r.channel];
  return counts;
}

Dataset Dataset::with_channels(const std::vector<std::size_t>& keep) const {
  std::vector<PropertyChannel> channels;
  std::vector<std::size_t> remap(registry_.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    channels.push_back(registry_.at(keep[i]));
    remap[keep[i]] = i;
  }
  std::vector<Record> recs;
  std::set<std::string> used;
  for (const auto& r : records_) {
    if (remap[r.channel] == static_cast<std::size_t>(-1)) continue;
    Record copy = r;
    copy.channel = remap[r.channel];
    used.insert(r.material_id);
    recs.push_back(std::move(copy));
  }
  std::vector<Material> mats;
  for (const auto& m : materials_) {
    if (used.count(m.id)) mats.push_back(m);
  }
  return Dataset(PropertyRegistry(std::move(channels)), std::move(mats), std::move(recs));
}

Dataset Dataset::without_empty_channels() const {
  const auto counts = channel_counts();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) keep.push_back(i);
  }
  return with_channels(keep);
}

namespace {

std::optional<double> parse_double(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string::npos) return std::nullopt;
  const auto last = text.find_last_not_of(" \t");
  double v = 0.0;
  const char* begin = text.data() + first;
  const char* end = text.data() + last + 1;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

Dataset load_records(std::istream& in, const PropertyRegistry& registry, DedupePolicy dedupe) {
  const CsvTable table = read_csv(in);
  const std::array<const char*, 6> required = {"material_id", "smiles", "property", "fidelity", "value", "density"};
  std::array<std::size_t, 6> col{};
  for (std::size_t i = 0; i < required.size(); ++i) {
    col[i] = table.column(required[i]);
    if (col[i] == std::string::npos) {
      throw Error(ErrorCode::ParseFailure, fmt::format("dataset header lacks column '{}'", required[i]));
    }
  }

  std::map<std::string, Material> materials;
  struct Pending {
    std::size_t line;
    std::vector<double> values;
    std::vector<double> densities;
  };
  std::map<std::pair<std::string, std::size_t>, Pending> grouped;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto fail = [&](const std::string& reason) -> Error {
      return Error(ErrorCode::ParseFailure, fmt::format("row {}: {}", line, reason));
    };
    const std::string id = trim(row[col[0]]);
    const std::string smiles = trim(row[col[1]]);
    const std::string property = trim(row[col[2]]);
    const std::string fidelity_text = trim(row[col[3]]);
    if (id.empty()) throw fail("empty material_id");

    const auto fidelity = fidelity_from_name(fidelity_text);
    if (!fidelity) {
      throw Error(ErrorCode::UnknownChannel,
                  fmt::format("row {}: unknown fidelity '{}'", line, fidelity_text));
    }
    const auto channel = registry.find(property, *fidelity);
    if (!channel) {
      throw Error(ErrorCode::UnknownChannel,
                  fmt::format("row {}: channel '{}:{}' is not in the registry", line, property, fidelity_text));
    }
    const auto value = parse_double(row[col[4]]);
    if (!value || !std::isfinite(*value)) throw fail(fmt::format("bad value '{}'", row[col[4]]));
    if (registry.at(*channel).transform == Transform::Log10 && *value <= 0.0) {
      throw Error(ErrorCode::NonPositiveForLog,
                  fmt::format("row {}: {} needs a positive value, got {}", line,
                              registry.at(*channel).name(), *value));
    }
    std::optional<double> density;
    if (!trim(row[col[5]]).empty()) {
      density = parse_double(row[col[5]]);
      if (!density || !std::isfinite(*density)) throw fail(fmt::format("bad density '{}'", row[col[5]]));
    }

    auto it = materials.find(id);
    if (it == materials.end()) {
      try {
        materials.emplace(id, Material{id, smiles, parse_smiles(smiles)});
      } catch (const Error& e) {
        throw fail(fmt::format("material '{}': {} ({})", id, e.what(), error_code_name(e.code())));
      }
    } else if (it->second.smiles != smiles) {
      throw fail(fmt::format("material '{}' appears with two different SMILES", id));
    }

    auto& slot = grouped[{id, *channel}];
    if (!slot.values.empty() && dedupe == DedupePolicy::Error) {
      throw Error(ErrorCode::DuplicateRecord,
                  fmt::format("row {}: duplicate record for {} / {} (first on row {})", line, id,
                              registry.at(*channel).name(), slot.line));
    }
    if (slot.values.empty()) slot.line = line;
    slot.values.push_back(*value);
    if (density) slot.densities.push_back(*density);
  }

  std::vector<Record> records;
  for (const auto& [key, p] : grouped) {
    Record rec;
    rec.material_id = key.first;
    rec.channel = key.second;
    double sum = 0.0;
    for (double v : p.values) sum += v;
    rec.value = sum / static_cast<double>(p.values.size());
    if (!p.densities.empty()) {
      double ds = 0.0;
      for (double d : p.densities) ds += d;
      rec.density = ds / static_cast<double>(p.densities.size());
    }
    records.push_back(std::move(rec));
  }
  std::vector<Material> mats;
  for (auto& [id, m] : materials) mats.push_back(std::move(m));
  return Dataset(registry, std::move(mats), std::move(records));
}

Dataset load_records(const std::string& path, const PropertyRegistry& registry, DedupePolicy dedupe) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open dataset '{}'", path));
  return load_records(in, registry, dedupe);
}

std::vector<std::size_t> subset_channels(const PropertyRegistry& registry, int subset_id) {
  if (subset_id < 1 || subset_id > 6) {
    throw Error(ErrorCode::UnknownSubset, fmt::format("subset {} is not one of 1..6", subset_id));
  }
  auto detonation = [](const PropertyChannel& c) {
    return c.property == "det_velocity" || c.property == "det_pressure" ||
           c.property == "heat_detonation" ||
           (c.property == "gurney_energy" && c.fidelity == Fidelity::Calc);
  };
  auto sensitivity = [](const PropertyChannel& c) {
    return c.property == "impact_h50" && c.fidelity == Fidelity::Exp;
  };
  auto thermodynamic = [](const PropertyChannel& c) {
    return (c.property == "heat_sublimation" && c.fidelity == Fidelity::Calc) ||
           (c.property == "heat_form_gas" && c.fidelity == Fidelity::Calc) ||
           (c.property == "heat_form_crystal" && c.fidelity == Fidelity::Exp);
  };
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& c = registry.at(i);
    bool in = false;
    switch (subset_id) {
      case 1: in = detonation(c); break;
      case 2: in = detonation(c) || sensitivity(c); break;
      case 3: in = detonation(c) || thermodynamic(c); break;
      case 4: in = thermodynamic(c); break;
      case 5: in = sensitivity(c) || thermodynamic(c); break;
      case 6: in = true; break;
    }
    if (in) keep.push_back(i);
  }
  return keep;
}

Dataset subset_filter(const Dataset& dataset, int subset_id) {
  return dataset.with_channels(subset_channels(dataset.registry(), subset_id));
}

}  // namespace emtk
