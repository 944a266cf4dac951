#pragma once

#include <cstddef>
#include <span>

namespace emtk {

// Root mean squared error. Throws LengthMismatch (also for empty input).
double rmse(std::span<const double> pred, std::span<const double> actual);

// 1 - SSE/SST with SST about the mean of `actual`. Throws LengthMismatch and
// ConstantTargets.
double r2(std::span<const double> pred, std::span<const double> actual);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) estimate; 0 for a single value
  std::size_t n = 0;
};

// Two-pass mean and sample standard deviation. Empty input gives n = 0.
MeanStd mean_std(std::span<const double> values);

}  // namespace emtk
