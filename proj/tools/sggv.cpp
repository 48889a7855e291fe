#include <iostream>

#include <CLI11.hpp>

#include "sggv/cli/commands.hpp"
#include "sggv/common/parallel.hpp"

namespace {

void add_common(CLI::App* cmd, sggv::cli::CommonOptions& o, bool needs_out) {
  cmd->add_option("--config", o.config_path, "JSON config file (flat object)");
  auto* out = cmd->add_option("--out", o.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--set", o.assignments, "override any config key: key=value")
      ->take_all()
      ->expected(1);
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--strategy", o.strategy, "deep_all|agr_sum|agr_rand|pcgrad|sggv");
  cmd->add_option("--tau", o.tau, "voting threshold (0: ceil(2L/3))");
  cmd->add_option("--inputs", o.inputs, "comma list of raw,shape,texture");
  cmd->add_option("--shape-op", o.shape_op, "sobel|laplace");
  cmd->add_option("--pairing", o.pairing, "paired|unpaired");
  cmd->add_option("--target", o.target, "held-out domain name or index, or all");
}

}  // namespace

int main(int argc, char** argv) {
  sggv::apply_thread_cap_from_env();
  CLI::App app{"Shape guided gradient voting for domain generalization"};
  app.require_subcommand(1);

  sggv::cli::CommonOptions gen_opts, train_opts, sweep_opts, probe_opts;
  auto* gen = app.add_subcommand("generate-data", "write a synthetic dataset to a folder");
  add_common(gen, gen_opts, true);

  auto* train = app.add_subcommand("train", "run leave-one-domain-out training");
  add_common(train, train_opts, true);

  auto* sweep = app.add_subcommand("sweep-tau", "train once per voting threshold");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--taus", sweep_opts.taus, "comma list of thresholds, e.g. 5,6,7");

  std::filesystem::path report_dir;
  bool plots = false;
  auto* report = app.add_subcommand("report", "aggregate results.jsonl files");
  report->add_option("dir", report_dir, "results directory")->required();
  report->add_flag("--plots", plots, "write SVG plots for every metrics.csv");

  sggv::cli::ProbeCommandOptions probe;
  auto* probe_cmd = app.add_subcommand("probe-data", "linear-probe domain gap check");
  add_common(probe_cmd, probe_opts, false);
  probe_cmd->add_option("--probe-iterations", probe.iterations, "probe training iterations");
  probe_cmd->add_option("--probe-lr", probe.lr, "probe learning rate");
  probe_cmd->add_option("--probe-seeds", probe.seeds, "comma list of probe seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*gen) return sggv::cli::cmd_generate_data(gen_opts, std::cout, std::cerr);
  if (*train) return sggv::cli::cmd_train(train_opts, std::cout, std::cerr);
  if (*sweep) return sggv::cli::cmd_sweep_tau(sweep_opts, std::cout, std::cerr);
  if (*report) return sggv::cli::cmd_report(report_dir, plots, std::cout, std::cerr);
  return sggv::cli::cmd_probe_data(probe_opts, probe, std::cout, std::cerr);
}
