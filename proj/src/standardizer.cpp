#include "emtk/standardizer.hpp"

#include <cmath>
#include <fmt/format.h>

#include "emtk/error.hpp"

namespace emtk {

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

template <typename Get>
Moments moments(std::size_t n, Get get) {
  Moments m;
  if (n == 0) return m;
  for (std::size_t i = 0; i < n; ++i) m.mean += get(i);
  m.mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = get(i) - m.mean;
    ss += d * d;
  }
  m.std = std::sqrt(ss / static_cast<double>(n));
  return m;
}

}  // namespace

Standardizer Standardizer::fit(const SampleTable& train) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyData, "cannot fit a standardizer on no samples");
  Standardizer s;
  const std::size_t d = train.x.cols();
  for (std::size_t j = 0; j < d; ++j) {
    const auto m = moments(train.size(), [&](std::size_t i) { return train.x(i, j); });
    const bool constant = !(m.std > 0.0);
    s.feature_mean_.push_back(m.mean);
    s.feature_scale_.push_back(constant ? 1.0 : m.std);
    s.feature_constant_.push_back(constant);
  }
  for (std::size_t c = 0; c < train.n_channels; ++c) {
    const auto rows = train.rows_of_channel(c);
    const auto m = moments(rows.size(), [&](std::size_t i) { return train.y[rows[i]]; });
    s.target_mean_.push_back(m.mean);
    s.target_scale_.push_back(m.std > 0.0 ? m.std : 1.0);
  }
  return s;
}

std::vector<double> Standardizer::apply_features(std::span<const double> row) const {
  if (row.size() != feature_mean_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("feature row has {} values, standardizer expects {}", row.size(),
                            feature_mean_.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - feature_mean_[j]) / feature_scale_[j];
  return out;
}

double Standardizer::apply_target(std::size_t channel, double transformed) const {
  return (transformed - target_mean_.at(channel)) / target_scale_.at(channel);
}

double Standardizer::destandardize(std::size_t channel, double z) const {
  return z * target_scale_.at(channel) + target_mean_.at(channel);
}

double Standardizer::invert_target(std::size_t channel, double z, const PropertyRegistry& registry) const {
  return registry.at(channel).inverse(destandardize(channel, z));
}

SampleTable Standardizer::apply(const SampleTable& table) const {
  SampleTable out;
  out.n_channels = table.n_channels;
  out.x = Matrix(0, table.x.cols());
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.append(apply_features(table.x.row(i)), table.channel[i], apply_target(table.channel[i], table.y[i]),
               table.material[i]);
  }
  return out;
}

nlohmann::json Standardizer::to_json() const {
  return {{"feature_mean", feature_mean_},
          {"feature_scale", feature_scale_},
          {"feature_constant", feature_constant_},
          {"target_mean", target_mean_},
          {"target_scale", target_scale_}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  try {
    j.at("feature_mean").get_to(s.feature_mean_);
    j.at("feature_scale").get_to(s.feature_scale_);
    j.at("feature_constant").get_to(s.feature_constant_);
    j.at("target_mean").get_to(s.target_mean_);
    j.at("target_scale").get_to(s.target_scale_);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, fmt::format("malformed standardizer: {}", e.what()));
  }
  if (s.feature_scale_.size() != s.feature_mean_.size() ||
      s.feature_constant_.size() != s.feature_mean_.size() ||
      s.target_scale_.size() != s.target_mean_.size()) {
    throw Error(ErrorCode::CorruptFile, "standardizer arrays disagree in length");
  }
  return s;
}

}  // namespace emtk
