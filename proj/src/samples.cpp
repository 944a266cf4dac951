#include "emtk/samples.hpp"

#include <algorithm>
#include <map>

namespace emtk {

void SampleTable::append(std::span<const double> features, std::size_t ch, double target,
                         std::string material_id) {
  x.append_row(features);
  channel.push_back(ch);
  y.push_back(target);
  material.push_back(std::move(material_id));
}

SampleTable SampleTable::rows(std::span<const std::size_t> indices) const {
  SampleTable out;
  out.n_channels = n_channels;
  out.x = Matrix(0, x.cols());
  for (std::size_t i : indices) out.append(x.row(i), channel[i], y[i], material[i]);
  return out;
}

std::vector<std::size_t> SampleTable::rows_of(const std::vector<std::string>& sorted_ids, bool inside) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::binary_search(sorted_ids.begin(), sorted_ids.end(), material[i]) == inside) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SampleTable::rows_of_channel(std::size_t ch) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (channel[i] == ch) out.push_back(i);
  }
  return out;
}

std::vector<std::string> SampleTable::materials() const {
  std::vector<std::string> ids = material;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

SampleBuildResult build_samples(const Dataset& dataset, const FeatureSchema& schema) {
  SampleBuildResult result;
  result.table.n_channels = dataset.registry().size();
  result.table.x = Matrix(0, schema.size());
  std::map<std::string, std::vector<double>> cache;
  for (const auto& r : dataset.records()) {
    if (schema.include_density() && !r.density) {
      ++result.dropped_without_density;
      continue;
    }
    auto it = cache.find(r.material_id);
    if (it == cache.end()) {
      it = cache.emplace(r.material_id, featurize(dataset.material(r.material_id).graph,
                                                  FeatureSchema(schema.vocabulary(), false), std::nullopt)
                                            .values)
               .first;
    }
    std::vector<double> row = it->second;
    if (schema.include_density()) row.push_back(*r.density);
    result.table.append(row, r.channel, dataset.registry().at(r.channel).forward(r.value), r.material_id);
  }
  return result;
}

}  // namespace emtk
