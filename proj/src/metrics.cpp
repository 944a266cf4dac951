#include "emtk/metrics.hpp"

#include <cmath>
#include <fmt/format.h>

#include "emtk/error.hpp"

namespace emtk {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size() || pred.empty()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("metric needs equal non-zero lengths, got {} and {}", pred.size(), actual.size()));
  }
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual);
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sse += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual);
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sse += (pred[i] - actual[i]) * (pred[i] - actual[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (!(sst > 0.0)) throw Error(ErrorCode::ConstantTargets, "r2 is undefined for constant targets");
  return 1.0 - sse / sst;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  m.n = values.size();
  if (m.n == 0) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(m.n);
  if (m.n < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(m.n - 1));
  return m;
}

}  // namespace emtk
