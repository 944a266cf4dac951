#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "emtk/dataset.hpp"

namespace emtk {

// Pearson r. Throws LengthMismatch; returns nullopt for fewer than two
// points or zero variance on either side.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> channels;
  std::vector<std::vector<std::optional<double>>> r;
  std::vector<std::vector<std::size_t>> overlap;  // materials having both channels
};

// Pairwise r over materials that carry both channels, on transformed values.
// Pairs with overlap < 2 (or zero variance) are undefined.
CorrelationMatrix pearson_matrix(const Dataset& dataset);

// Square CSV matrices with a leading "channel" column; undefined r is "NA".
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);
void write_overlap_csv(std::ostream& out, const CorrelationMatrix& m);

}  // namespace emtk
