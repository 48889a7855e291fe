#include "sggv/cli/commands.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "sggv/cli/report.hpp"
#include "sggv/common/error.hpp"
#include "sggv/data/folder.hpp"
#include "sggv/harness/experiment.hpp"
#include "sggv/harness/probe.hpp"
#include "sggv/harness/results.hpp"

namespace sggv::cli {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
  if (!os) throw InputError("failed writing " + path.string());
}

std::string sanitize(std::string name) {
  for (char& c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return name;
}

void require_out(const CommonOptions& options) {
  if (options.out.empty()) throw ConfigError("--out is required");
}

// A fully validated training plan: one config per (target, tau) run.
struct Plan {
  Settings settings;
  data::MultiDomainDataset dataset;
  std::vector<harness::ExperimentConfig> runs;
};

Plan plan_runs(const CommonOptions& options, const std::vector<int>& taus) {
  Plan plan;
  plan.settings = resolve_settings(options);
  if (!taus.empty()) plan.settings["strategy"] = "sggv";
  auto base = experiment_config(plan.settings);
  plan.dataset = harness::load_dataset(base);
  if (taus.empty()) {
    resolve_tau(plan.settings, plan.dataset.domain_count());
    base = experiment_config(plan.settings);
  }
  const auto targets = resolve_targets(plan.settings, plan.dataset);
  const std::vector<int> tau_list = taus.empty() ? std::vector<int>{-1} : taus;
  for (int tau : tau_list) {
    for (int t : targets) {
      harness::ExperimentConfig c = base;
      c.target_domain = t;
      if (tau >= 0) std::get<agg::Sggv>(c.strategy).tau = tau;
      c.validate(plan.dataset.domain_count());
      plan.runs.push_back(std::move(c));
    }
  }
  return plan;
}

std::string dump_settings(const Settings& s) { return s.dump(2) + "\n"; }

}  // namespace

Settings resolve_settings(const CommonOptions& options) {
  Settings s = default_settings();
  if (!options.config_path.empty())
    merge_settings(s, read_settings_file(options.config_path), options.config_path);
  for (const auto& a : options.assignments) merge_settings(s, parse_assignment(a), "--set " + a);
  Settings flags = Settings::object();
  if (options.seed) flags["seed"] = *options.seed;
  if (options.strategy) flags["strategy"] = *options.strategy;
  if (options.tau) flags["tau"] = *options.tau;
  if (options.inputs) flags["inputs"] = *options.inputs;
  if (options.shape_op) flags["shape_op"] = *options.shape_op;
  if (options.pairing) flags["pairing"] = *options.pairing;
  if (options.target) flags["target"] = *options.target;
  if (options.taus) flags["taus"] = *options.taus;
  merge_settings(s, flags, "command line");
  return s;
}

int cmd_generate_data(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(options);
    const Settings s = resolve_settings(options);
    if (!s["data_folder"].get<std::string>().empty())
      throw ConfigError("generate-data builds a synthetic dataset; data_folder must be empty");
    const auto spec = dataset_spec(s);
    const auto dataset = data::generate_dataset(spec);
    make_dirs(options.out);
    data::export_dataset(dataset, options.out);
    write_text(options.out / "resolved_config", dump_settings(s));

    out << "domain";
    for (const auto& c : dataset.class_names) out << '\t' << c;
    out << "\ttotal\n";
    for (const auto& dom : dataset.domains) {
      std::vector<int> counts(dataset.class_names.size(), 0);
      for (const auto& ex : dom.examples) ++counts[ex.label];
      out << dom.name;
      for (int n : counts) out << '\t' << n;
      out << '\t' << dom.examples.size() << '\n';
    }
    out << "wrote " << options.out.string() << '\n';
    return 0;
  });
}

int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(options);
    Plan plan = plan_runs(options, {});
    const bool single = plan.runs.size() == 1;
    make_dirs(options.out);
    make_dirs(options.out / "checkpoints");
    make_dirs(options.out / "plots");
    write_text(options.out / "resolved_config", dump_settings(plan.settings));
    const fs::path results = options.out / "results.jsonl";
    write_text(results, "");

    for (const auto& config : plan.runs) {
      const std::string target = plan.dataset.domains[config.target_domain].name;
      const fs::path dir = single ? options.out : options.out / sanitize(target);
      make_dirs(dir);
      std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
      if (!metrics) throw InputError("cannot write " + (dir / "metrics.csv").string());
      harness::MetricsWriter writer(metrics);
      harness::RunOptions run_options;
      run_options.metrics = &writer;
      const auto report = harness::run_experiment(config, plan.dataset, run_options);
      harness::append_results(results, harness::to_record(report));
      write_text(options.out / "checkpoints" / ("best_" + sanitize(target) + ".ckpt"),
                 report.best_checkpoint);
      char line[256];
      std::snprintf(line, sizeof line,
                    "target %-16s test_acc %.4f  selected_iter %d  retained %.4f\n",
                    target.c_str(), report.test_accuracy, report.selected_iteration,
                    report.mean_retained_proportion);
      out << line << std::flush;
    }
    return 0;
  });
}

int cmd_sweep_tau(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(options);
    const Settings s = resolve_settings(options);
    const auto taus = parse_int_list(s["taus"].get<std::string>());
    if (taus.empty()) throw ConfigError("tau list is empty (use --taus, e.g. --taus 5,6,7)");
    Plan plan = plan_runs(options, taus);
    make_dirs(options.out);
    make_dirs(options.out / "checkpoints");
    make_dirs(options.out / "plots");
    write_text(options.out / "resolved_config", dump_settings(plan.settings));
    const fs::path results = options.out / "results.jsonl";
    write_text(results, "");
    std::ofstream sweep(options.out / "sweep.csv", std::ios::binary);
    if (!sweep) throw InputError("cannot write sweep.csv");
    sweep << "tau,target,seed,test_acc,modified_parameters,parameter_count,mean_retained_prop\n";

    const bool single_target = plan.runs.size() == taus.size();
    char line[256];
    std::snprintf(line, sizeof line, "%5s  %-16s  %8s  %12s  %10s\n", "tau", "target", "test_acc",
                  "modified", "retained");
    out << line;
    for (const auto& config : plan.runs) {
      const int tau = std::get<agg::Sggv>(config.strategy).tau;
      const std::string target = plan.dataset.domains[config.target_domain].name;
      fs::path dir = options.out / ("tau_" + std::to_string(tau));
      if (!single_target) dir /= sanitize(target);
      make_dirs(dir);
      std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
      harness::MetricsWriter writer(metrics);
      harness::RunOptions run_options;
      run_options.metrics = &writer;
      const auto report = harness::run_experiment(config, plan.dataset, run_options);
      harness::append_results(results, harness::to_record(report));
      write_text(options.out / "checkpoints" /
                     ("best_tau" + std::to_string(tau) + "_" + sanitize(target) + ".ckpt"),
                 report.best_checkpoint);
      sweep << tau << ',' << target << ',' << report.seed << ','
            << harness::format_double(report.test_accuracy) << ',' << report.modified_parameters
            << ',' << report.parameter_count << ','
            << harness::format_double(report.mean_retained_proportion) << '\n';
      sweep.flush();
      std::snprintf(line, sizeof line, "%5d  %-16s  %8.4f  %5zu / %5zu  %10.4f\n", tau,
                    target.c_str(), report.test_accuracy, report.modified_parameters,
                    report.parameter_count, report.mean_retained_proportion);
      out << line << std::flush;
    }
    return 0;
  });
}

int cmd_report(const fs::path& results_dir, bool plots, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto files = find_files(results_dir, "results.jsonl");
    std::vector<harness::ResultRecord> records;
    for (const auto& f : files) {
      auto r = harness::read_results(f);
      records.insert(records.end(), r.begin(), r.end());
    }
    if (records.empty())
      throw InputError("no result records found under " + results_dir.string());
    const auto rows = summarize(records);
    out << format_table(rows) << '\n' << format_table(average_over_targets(rows));
    write_summary_csv(rows, results_dir / "report.csv");
    out << "wrote " << (results_dir / "report.csv").string() << '\n';
    if (plots) {
      make_dirs(results_dir / "plots");
      for (const auto& m : find_files(results_dir, "metrics.csv")) {
        const auto rel = fs::relative(m.parent_path(), results_dir).generic_string();
        const std::string name = rel == "." ? "metrics" : sanitize(rel);
        write_text(results_dir / "plots" / (name + ".svg"),
                   render_svg(read_metrics_csv(m), rel == "." ? "run" : rel));
      }
      out << "wrote plots to " << (results_dir / "plots").string() << '\n';
    }
    return 0;
  });
}

int cmd_probe_data(const CommonOptions& options, const ProbeCommandOptions& probe,
                   std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Settings s = resolve_settings(options);
    const auto config = experiment_config(s);
    harness::ProbeOptions po;
    po.iterations = probe.iterations;
    po.lr = probe.lr;
    po.seeds.clear();
    for (int v : parse_int_list(probe.seeds)) {
      if (v < 0) throw ConfigError("probe seeds must be non-negative");
      po.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    if (po.seeds.empty()) throw ConfigError("probe seed list is empty");
    if (po.iterations < 1 || !(po.lr > 0)) throw ConfigError("probe needs iterations >= 1, lr > 0");
    const auto dataset = harness::load_dataset(config);
    const auto report = harness::probe_domain_gap(dataset, po);
    char line[256];
    for (const auto& f : report.folds) {
      std::snprintf(line, sizeof line, "seed %3llu  target %-16s  source %.4f  target %.4f\n",
                    static_cast<unsigned long long>(f.seed), f.target.c_str(), f.source_accuracy,
                    f.target_accuracy);
      out << line;
    }
    std::snprintf(line, sizeof line, "mean source %.4f  mean target %.4f  gap %.4f  %s\n",
                  report.mean_source_accuracy, report.mean_target_accuracy,
                  report.mean_source_accuracy - report.mean_target_accuracy,
                  report.certified ? "domain gap certified" : "domain gap NOT certified");
    out << line;
    return report.certified ? 0 : 1;
  });
}

}  // namespace sggv::cli
