#include "emtk/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "emtk/csv.hpp"
#include "emtk/error.hpp"

namespace emtk {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, fmt::format("pearson of {} vs {} values", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const Dataset& dataset) {
  const auto& registry = dataset.registry();
  const std::size_t n = registry.size();
  std::vector<std::map<std::string, double>> values(n);
  for (const auto& r : dataset.records()) values[r.channel][r.material_id] = registry.at(r.channel).forward(r.value);

  CorrelationMatrix m;
  for (const auto& c : registry.channels()) m.channels.push_back(c.name());
  m.r.assign(n, std::vector<std::optional<double>>(n));
  m.overlap.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      std::vector<double> xa;
      std::vector<double> xb;
      for (const auto& [id, v] : values[a]) {
        const auto it = values[b].find(id);
        if (it == values[b].end()) continue;
        xa.push_back(v);
        xb.push_back(it->second);
      }
      m.overlap[a][b] = m.overlap[b][a] = xa.size();
      std::optional<double> r = a == b ? (xa.size() >= 2 ? pearson(xa, xb) : std::nullopt) : pearson(xa, xb);
      if (a == b && r) r = 1.0;
      m.r[a][b] = m.r[b][a] = r;
    }
  }
  return m;
}

namespace {

template <typename Cell>
void write_square(std::ostream& out, const CorrelationMatrix& m, Cell cell) {
  out << "channel";
  for (const auto& c : m.channels) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t a = 0; a < m.channels.size(); ++a) {
    out << csv_escape(m.channels[a]);
    for (std::size_t b = 0; b < m.channels.size(); ++b) out << ',' << cell(a, b);
    out << '\n';
  }
}

}  // namespace

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  write_square(out, m, [&](std::size_t a, std::size_t b) {
    return m.r[a][b] ? fmt::format("{:.17g}", *m.r[a][b]) : std::string("NA");
  });
}

void write_overlap_csv(std::ostream& out, const CorrelationMatrix& m) {
  write_square(out, m, [&](std::size_t a, std::size_t b) { return std::to_string(m.overlap[a][b]); });
}

}  // namespace emtk
