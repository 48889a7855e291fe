#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sggv/harness/results.hpp"

namespace sggv::cli {

// Mean and sample standard deviation of test accuracy for one
// (strategy, target) cell; std is 0 for a single record.
struct SummaryRow {
  std::string strategy;  // voting runs carry their threshold: "sggv(tau=6)"
  std::string target;
  std::size_t runs = 0;
  double mean = 0;
  double std = 0;
};

std::string strategy_label(const harness::ResultRecord& r);

// Rows sorted by strategy label, then target.
std::vector<SummaryRow> summarize(const std::vector<harness::ResultRecord>& records);
// Per-strategy average over targets of the per-target means.
std::vector<SummaryRow> average_over_targets(const std::vector<SummaryRow>& rows);

std::string format_table(const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

// All files called `name` below `root`, sorted by path.
std::vector<std::filesystem::path> find_files(const std::filesystem::path& root,
                                              const std::string& name);

// Series read back from a metrics CSV.
struct MetricsSeries {
  std::vector<double> step_iter, retained;
  std::vector<double> val_iter, source_val, target;
};
MetricsSeries read_metrics_csv(const std::filesystem::path& path);

// Two stacked line charts: retained proportion and accuracies vs iteration.
std::string render_svg(const MetricsSeries& series, const std::string& title);

}  // namespace sggv::cli
