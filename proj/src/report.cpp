#include "emtk/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>

#include "emtk/csv.hpp"
#include "emtk/error.hpp"

namespace emtk {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Row {
  const ProtocolReport* report;
  const ChannelSummary* summary;
  std::string channel;
};

// Rows in report order, then channel order.
std::vector<Row> rows_of(const std::vector<ProtocolReport>& reports) {
  std::vector<Row> rows;
  for (const auto& r : reports) {
    for (const auto& s : r.summary) rows.push_back({&r, &s, r.channels.at(s.channel)});
  }
  return rows;
}

std::vector<std::string> channel_order(const std::vector<ProtocolReport>& reports) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    for (const auto& s : r.summary) {
      const auto& name = r.channels.at(s.channel);
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
  }
  return out;
}

bool is_multitask(const ProtocolReport& r) { return r.model_id.rfind("MT-", 0) == 0; }

}  // namespace

std::string format_mean_std(double mean, double std) { return fmt::format("{:.3f} ± {:.3f}", mean, std); }

std::string model_label(const ProtocolReport& report) {
  return fmt::format("{} {}", report.model_id, density_label(report.density));
}

void write_report_csv(std::ostream& out, const std::vector<ProtocolReport>& reports) {
  out << "model,density,channel,n_folds,rmse_mean,rmse_std,n_r2,r2_mean,r2_std\n";
  for (const auto& row : rows_of(reports)) {
    const auto& s = *row.summary;
    out << csv_escape(row.report->model_id) << ',' << (row.report->density ? "true" : "false") << ','
        << csv_escape(row.channel) << ',' << s.rmse.n << ',' << num(s.rmse.mean) << ',' << num(s.rmse.std) << ','
        << s.r2.n << ',' << (s.r2.n ? num(s.r2.mean) : "") << ',' << (s.r2.n ? num(s.r2.std) : "") << '\n';
  }
}

void write_folds_csv(std::ostream& out, const std::vector<ProtocolReport>& reports) {
  out << "model,density,channel,seed,fold,n_test,rmse,r2\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      out << csv_escape(r.model_id) << ',' << (r.density ? "true" : "false") << ',' << csv_escape(r.channels.at(f.channel))
          << ',' << f.seed << ',' << f.fold << ',' << f.n_test << ',' << num(f.rmse) << ','
          << (f.r2 ? num(*f.r2) : "") << '\n';
    }
  }
}

void write_bars_csv(std::ostream& out, const std::vector<ProtocolReport>& reports) {
  out << "channel,model,density,metric,mean,std,n\n";
  for (const auto& channel : channel_order(reports)) {
    for (const auto& row : rows_of(reports)) {
      if (row.channel != channel) continue;
      const auto& s = *row.summary;
      const auto prefix = fmt::format("{},{},{}", csv_escape(channel), csv_escape(row.report->model_id),
                                      row.report->density ? "true" : "false");
      out << prefix << ",rmse," << num(s.rmse.mean) << ',' << num(s.rmse.std) << ',' << s.rmse.n << '\n';
      if (s.r2.n) out << prefix << ",r2," << num(s.r2.mean) << ',' << num(s.r2.std) << ',' << s.r2.n << '\n';
    }
  }
}

void write_comparison_markdown(std::ostream& out, const std::vector<ProtocolReport>& reports,
                               const std::string& channel) {
  bool first = true;
  for (const auto& name : channel_order(reports)) {
    if (!channel.empty() && name != channel) continue;
    std::vector<Row> rows;
    for (const auto& row : rows_of(reports)) {
      if (row.channel == name) rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.summary->rmse.mean < b.summary->rmse.mean;
    });
    if (!first) out << '\n';
    first = false;
    out << "## " << name << "\n\n";
    out << "| Model | Test RMSE | Test R² |\n";
    out << "|---|---|---|\n";
    for (const auto& row : rows) {
      const auto& s = *row.summary;
      out << "| " << model_label(*row.report) << " | " << format_mean_std(s.rmse.mean, s.rmse.std) << " | "
          << (s.r2.n ? format_mean_std(s.r2.mean, s.r2.std) : std::string("n/a")) << " |\n";
    }
  }
}

void write_improvements_csv(std::ostream& out, const std::vector<ProtocolReport>& reports) {
  out << "channel,density,mt_model,mt_rmse,best_st_model,best_st_rmse,improvement_pct\n";
  const auto rows = rows_of(reports);
  for (const auto& channel : channel_order(reports)) {
    for (bool density : {false, true}) {
      const Row* best_st = nullptr;
      for (const auto& row : rows) {
        if (row.channel != channel || row.report->density != density || is_multitask(*row.report)) continue;
        if (!best_st || row.summary->rmse.mean < best_st->summary->rmse.mean) best_st = &row;
      }
      if (!best_st) continue;
      const double st = best_st->summary->rmse.mean;
      for (const auto& row : rows) {
        if (row.channel != channel || row.report->density != density || !is_multitask(*row.report)) continue;
        const double mt = row.summary->rmse.mean;
        out << csv_escape(channel) << ',' << (density ? "true" : "false") << ',' << csv_escape(row.report->model_id)
            << ',' << num(mt) << ',' << csv_escape(best_st->report->model_id) << ',' << num(st) << ','
            << (st > 0.0 ? num(100.0 * (st - mt) / st) : "") << '\n';
      }
    }
  }
}

std::vector<std::string> write_reports(const std::string& dir, const std::vector<ProtocolReport>& reports) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir, ec.message()));
  std::vector<std::string> written;
  auto emit = [&](const char* name, auto writer) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
    writer(out);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing '{}'", path));
    written.push_back(path);
  };
  emit("report.csv", [&](std::ostream& o) { write_report_csv(o, reports); });
  emit("folds.csv", [&](std::ostream& o) { write_folds_csv(o, reports); });
  emit("bars.csv", [&](std::ostream& o) { write_bars_csv(o, reports); });
  emit("comparison.md", [&](std::ostream& o) { write_comparison_markdown(o, reports); });
  emit("improvements.csv", [&](std::ostream& o) { write_improvements_csv(o, reports); });
  emit("notes.txt", [&](std::ostream& o) {
    for (const auto& r : reports) {
      for (const auto& n : r.notes) o << model_label(r) << ": " << n << '\n';
    }
  });
  return written;
}

}  // namespace emtk
