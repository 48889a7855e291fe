#include "sggv/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sggv/common/error.hpp"

namespace sggv::cli {

namespace fs = std::filesystem;

std::string strategy_label(const harness::ResultRecord& r) {
  if (r.strategy == "sggv") return "sggv(tau=" + std::to_string(r.tau) + ")";
  return r.strategy;
}

std::vector<SummaryRow> summarize(const std::vector<harness::ResultRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& r : records) cells[{strategy_label(r), r.target}].push_back(r.test_acc);
  std::vector<SummaryRow> rows;
  for (const auto& [key, values] : cells) {
    SummaryRow row{key.first, key.second, values.size(), 0, 0};
    for (double v : values) row.mean += v;
    row.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0;
      for (double v : values) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SummaryRow> average_over_targets(const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::vector<const SummaryRow*>> by_strategy;
  for (const auto& r : rows) by_strategy[r.strategy].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [strategy, cells] : by_strategy) {
    SummaryRow row{strategy, "avg", 0, 0, 0};
    for (const auto* c : cells) {
      row.mean += c->mean;
      row.runs += c->runs;
    }
    row.mean /= static_cast<double>(cells.size());
    out.push_back(row);
  }
  return out;
}

std::string format_table(const std::vector<SummaryRow>& rows) {
  std::size_t ws = 8, wt = 6;
  for (const auto& r : rows) {
    ws = std::max(ws, r.strategy.size());
    wt = std::max(wt, r.target.size());
  }
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %4s  %s\n", static_cast<int>(ws), "strategy",
                static_cast<int>(wt), "target", "runs", "test accuracy (%)");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %-*s  %4zu  %6.2f +- %5.2f\n", static_cast<int>(ws),
                  r.strategy.c_str(), static_cast<int>(wt), r.target.c_str(), r.runs,
                  100 * r.mean, 100 * r.std);
    os << buf;
  }
  return os.str();
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "strategy,target,runs,mean_test_acc,std_test_acc\n";
  for (const auto& r : rows)
    os << r.strategy << ',' << r.target << ',' << r.runs << ',' << harness::format_double(r.mean)
       << ',' << harness::format_double(r.std) << '\n';
}

std::vector<fs::path> find_files(const fs::path& root, const std::string& name) {
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() == name) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

MetricsSeries read_metrics_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  MetricsSeries s;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    f.resize(7);
    const double it = std::stod(f[0]);
    if (!f[3].empty()) {
      s.step_iter.push_back(it);
      s.retained.push_back(std::stod(f[3]));
    }
    if (!f[5].empty()) {
      s.val_iter.push_back(it);
      s.source_val.push_back(std::stod(f[5]));
      s.target.push_back(std::stod(f[6]));
    }
  }
  return s;
}

namespace {

struct Panel {
  double x0, y0, w, h;
  double xmax;
  std::ostringstream& os;

  double px(double x) const { return x0 + (xmax > 0 ? x / xmax : 0) * w; }
  double py(double y) const { return y0 + (1 - std::clamp(y, 0.0, 1.0)) * h; }

  void frame(const std::string& label) {
    os << "<rect x='" << x0 << "' y='" << y0 << "' width='" << w << "' height='" << h
       << "' fill='none' stroke='#888'/>\n";
    os << "<text x='" << x0 << "' y='" << y0 - 6 << "' font-size='12'>" << label << "</text>\n";
    for (double t : {0.0, 0.5, 1.0})
      os << "<text x='" << x0 - 28 << "' y='" << py(t) + 4 << "' font-size='10'>" << t
         << "</text>\n";
    os << "<text x='" << x0 + w - 30 << "' y='" << y0 + h + 14 << "' font-size='10'>" << xmax
       << "</text>\n";
  }

  void line(const std::vector<double>& xs, const std::vector<double>& ys,
            const std::string& color) {
    if (xs.empty()) return;
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) os << px(xs[i]) << ',' << py(ys[i]) << ' ';
    os << "'/>\n";
  }
};

}  // namespace

std::string render_svg(const MetricsSeries& s, const std::string& title) {
  std::ostringstream os;
  double xmax = 0;
  if (!s.step_iter.empty()) xmax = std::max(xmax, s.step_iter.back());
  if (!s.val_iter.empty()) xmax = std::max(xmax, s.val_iter.back());
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='460'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='40' y='20' font-size='14'>" << title << "</text>\n";
  Panel top{50, 50, 560, 160, xmax, os};
  top.frame("retained proportion");
  top.line(s.step_iter, s.retained, "#1f77b4");
  Panel bottom{50, 260, 560, 160, xmax, os};
  bottom.frame("accuracy (blue: source val, red: target)");
  bottom.line(s.val_iter, s.source_val, "#1f77b4");
  bottom.line(s.val_iter, s.target, "#d62728");
  os << "</svg>\n";
  return os.str();
}

}  // namespace sggv::cli
