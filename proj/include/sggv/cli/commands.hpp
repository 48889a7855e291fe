#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sggv/cli/config_file.hpp"

namespace sggv::cli {

// Flags shared by the subcommands. Precedence: these flags, then --set
// assignments, then the config file, then defaults.
struct CommonOptions {
  std::string config_path;
  std::filesystem::path out;
  std::vector<std::string> assignments;  // --set key=value
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<int> tau;
  std::optional<std::string> inputs;
  std::optional<std::string> shape_op;
  std::optional<std::string> pairing;
  std::optional<std::string> target;
  std::optional<std::string> taus;
};

Settings resolve_settings(const CommonOptions& options);

// Exit status: 0 on success, 2 for configuration errors (reported before
// anything is written), 1 for any other failure.
int cmd_generate_data(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep_tau(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& results_dir, bool plots, std::ostream& out,
               std::ostream& err);

struct ProbeCommandOptions {
  int iterations = 1000;
  double lr = 1e-3;
  std::string seeds = "0,1,2,3,4";
};
// Linear-probe domain-gap check of the configured dataset. Exits 1 when the
// gap is not certified.
int cmd_probe_data(const CommonOptions& options, const ProbeCommandOptions& probe,
                   std::ostream& out, std::ostream& err);

}  // namespace sggv::cli
