#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sggv/harness/experiment.hpp"

namespace sggv::harness {

// One line of results.jsonl.
struct ResultRecord {
  std::string target;
  std::string strategy;
  int tau = 0;
  std::uint64_t seed = 0;
  int selected_iter = 0;
  double test_acc = 0;
};

ResultRecord to_record(const RunReport& report);
std::string to_json_line(const ResultRecord& record);
// Throws InputError on malformed lines.
ResultRecord parse_json_line(const std::string& line);

void append_results(const std::filesystem::path& file, const ResultRecord& record);
std::vector<ResultRecord> read_results(const std::filesystem::path& file);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace sggv::harness
