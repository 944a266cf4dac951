#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "emtk/protocol.hpp"

namespace emtk {

// "0.238 ± 0.010".
std::string format_mean_std(double mean, double std);

// "ST-RF (molecular descriptors only)".
std::string model_label(const ProtocolReport& report);

// One row per (model, density, channel): fold count, RMSE and R² mean/std at
// full precision. R² columns are empty when no fold defined it.
void write_report_csv(std::ostream& out, const std::vector<ProtocolReport>& reports);
// Every fold-level value behind report.csv.
void write_folds_csv(std::ostream& out, const std::vector<ProtocolReport>& reports);
// Grouped-bar data: channel, model, density, metric, mean, std.
void write_bars_csv(std::ostream& out, const std::vector<ProtocolReport>& reports);
// Per channel, a markdown comparison table: rows sorted by ascending mean
// RMSE, "mean ± std" to three decimals.
// An empty `channel` writes every channel.
void write_comparison_markdown(std::ostream& out, const std::vector<ProtocolReport>& reports,
                               const std::string& channel = {});
// For every multi-task row: (best single-task RMSE - MT RMSE) / best single-task
// RMSE in percent, per channel and density mode.
void write_improvements_csv(std::ostream& out, const std::vector<ProtocolReport>& reports);

// Writes report.csv, folds.csv, bars.csv, comparison.md, improvements.csv and
// notes.txt into `dir` (created if missing). Returns the written paths.
std::vector<std::string> write_reports(const std::string& dir, const std::vector<ProtocolReport>& reports);

}  // namespace emtk
