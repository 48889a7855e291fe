#include <charconv>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "sggv/common/error.hpp"
#include "sggv/harness/experiment.hpp"
#include "sggv/harness/results.hpp"

namespace sggv::harness {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

MetricsWriter::MetricsWriter(std::ostream& os, bool header) : os_(os) {
  if (header) os_ << "iter,source_tag,loss,retained_prop,agreement_rate,src_val_acc,tgt_acc\n";
}

void MetricsWriter::step(int iteration, const StepMetrics& m) {
  for (std::size_t l = 0; l < m.tags.size(); ++l)
    os_ << iteration << ',' << m.tags[l] << ',' << format_double(m.losses[l]) << ",,,,\n";
  os_ << iteration << ",,," << format_double(m.retained_proportion) << ','
      << format_double(m.agreement_rate) << ",,\n";
  os_.flush();
}

void MetricsWriter::validation(const ValidationRecord& v) {
  os_ << v.iteration << ",,,,," << format_double(v.source_val_accuracy) << ','
      << format_double(v.target_accuracy) << '\n';
  os_.flush();
}

ResultRecord to_record(const RunReport& report) {
  return {report.target, report.strategy, report.tau, report.seed, report.selected_iteration,
          report.test_accuracy};
}

std::string to_json_line(const ResultRecord& r) {
  nlohmann::ordered_json j;
  j["target"] = r.target;
  j["strategy"] = r.strategy;
  j["tau"] = r.tau;
  j["seed"] = r.seed;
  j["selected_iter"] = r.selected_iter;
  j["test_acc"] = r.test_acc;
  return j.dump();
}

ResultRecord parse_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ResultRecord r;
    r.target = j.at("target").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.tau = j.at("tau").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.selected_iter = j.at("selected_iter").get<int>();
    r.test_acc = j.at("test_acc").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed results line: " + std::string(e.what()));
  }
}

void append_results(const std::filesystem::path& file, const ResultRecord& record) {
  std::ofstream os(file, std::ios::app);
  if (!os) throw InputError("cannot open " + file.string() + " for writing");
  os << to_json_line(record) << '\n';
}

std::vector<ResultRecord> read_results(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw InputError("cannot open " + file.string());
  std::vector<ResultRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_json_line(line));
    } catch (const InputError& e) {
      throw InputError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sggv::harness
