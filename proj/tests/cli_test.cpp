#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sggv/cli/commands.hpp"
#include "sggv/cli/report.hpp"
#include "sggv/common/error.hpp"
#include "sggv/harness/results.hpp"
#include "support.hpp"

using namespace sggv;
using namespace sggv::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Small and fast: 16x16 images, 10 per cell, a handful of iterations.
CommonOptions tiny(const fs::path& out) {
  CommonOptions o;
  o.out = out;
  o.assignments = {"image_size=16", "examples_per_cell=10", "iterations=6", "val_interval=3",
                   "batch_size=4", "lr=0.001"};
  return o;
}

}  // namespace

TEST_CASE("settings reject unknown keys and wrong types") {
  auto s = default_settings();
  try {
    merge_settings(s, Settings::parse(R"({"learning_rate": 0.1})"), "cfg.json");
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
  }
  CHECK_THROWS_AS(merge_settings(s, Settings::parse(R"({"iterations": "ten"})"), "x"),
                  ConfigError);
  CHECK_THROWS_AS(merge_settings(s, Settings::parse(R"({"iterations": 1.5})"), "x"), ConfigError);
  CHECK_THROWS_AS(merge_settings(s, Settings::parse(R"({"seed": -1})"), "x"), ConfigError);
  merge_settings(s, Settings::parse(R"({"lr": 1, "inputs": "raw,shape"})"), "x");
  CHECK(s["lr"].get<double>() == 1.0);
  CHECK(s["lr"].is_number_float());
  CHECK(experiment_config(s).inputs.size() == 2);
}

TEST_CASE("key=value assignments") {
  CHECK(parse_assignment("iterations=5")["iterations"] == 5);
  CHECK(parse_assignment("strategy=sggv")["strategy"] == "sggv");
  CHECK(parse_assignment("pcgrad_shuffle=false")["pcgrad_shuffle"] == false);
  CHECK_THROWS_AS(parse_assignment("novalue"), ConfigError);
  CHECK(parse_int_list("5, 6,7") == std::vector<int>{5, 6, 7});
  CHECK(parse_int_list("").empty());
  CHECK_THROWS_AS(parse_int_list("5,x"), ConfigError);
}

TEST_CASE("flags override the file, which overrides defaults") {
  test::ScratchDir dir("prec");
  const auto cfg = dir.path() / "c.json";
  std::ofstream(cfg) << R"({"strategy": "agr_sum", "seed": 4, "tau": 5})";
  CommonOptions o;
  o.config_path = cfg.string();
  auto s = resolve_settings(o);
  CHECK(s["strategy"] == "agr_sum");
  CHECK(s["seed"] == 4);
  CHECK(s["iterations"] == 1000);
  o.seed = 9;
  o.assignments = {"seed=7", "iterations=3"};
  s = resolve_settings(o);
  CHECK(s["seed"] == 9);
  CHECK(s["iterations"] == 3);
}

TEST_CASE("strategy and tau resolution") {
  auto s = default_settings();
  s["strategy"] = "sggv";
  s["inputs"] = "raw,shape,texture";
  resolve_tau(s, 4);
  CHECK(s["tau"] == 6);
  const auto c = experiment_config(s);
  CHECK(std::get<agg::Sggv>(c.strategy).tau == 6);
  s["strategy"] = "nope";
  CHECK_THROWS_AS(experiment_config(s), ConfigError);
}

TEST_CASE("generate-data writes the folder layout") {
  test::ScratchDir dir("gen");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "a");
  REQUIRE(cmd_generate_data(o, out, err) == 0);
  int domains = 0;
  for (const auto& e : fs::directory_iterator(o.out))
    if (e.is_directory()) {
      ++domains;
      int classes = 0;
      for (const auto& c : fs::directory_iterator(e.path())) classes += c.is_directory();
      CHECK(classes == 3);
    }
  CHECK(domains == 4);
  CHECK(fs::exists(o.out / "resolved_config"));
  CHECK(out.str().find("solid-color\t10\t10\t10\t30") != std::string::npos);

  auto o2 = o;
  o2.out = dir.path() / "b";
  REQUIRE(cmd_generate_data(o2, out, err) == 0);
  CHECK(slurp(o.out / "manifest.csv") == slurp(o2.out / "manifest.csv"));
}

TEST_CASE("generate-data errors") {
  test::ScratchDir dir("generr");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "x");
  o.assignments.push_back("colour=red");
  CHECK(cmd_generate_data(o, out, err) == 2);
  CHECK(err.str().find("colour") != std::string::npos);
  CHECK_FALSE(fs::exists(o.out));

  std::ofstream(dir.path() / "file") << "x";
  auto blocked = tiny(dir.path() / "file" / "sub");
  CHECK(cmd_generate_data(blocked, out, err) != 0);
}

TEST_CASE("train writes the run artifacts") {
  test::ScratchDir dir("train");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "run");
  o.strategy = "sggv";
  o.inputs = "raw,shape,texture";
  o.target = "stripes";
  REQUIRE(cmd_train(o, out, err) == 0);
  for (const char* f : {"resolved_config", "metrics.csv", "results.jsonl"})
    CHECK(fs::exists(o.out / f));
  CHECK(fs::exists(o.out / "checkpoints" / "best_stripes.ckpt"));
  CHECK(fs::is_directory(o.out / "plots"));
  const auto records = harness::read_results(o.out / "results.jsonl");
  REQUIRE(records.size() == 1);
  CHECK(records[0].target == "stripes");
  CHECK(records[0].tau == 6);
  // resolved_config reproduces the run.
  CommonOptions again;
  again.config_path = (o.out / "resolved_config").string();
  again.out = dir.path() / "again";
  REQUIRE(cmd_train(again, out, err) == 0);
  CHECK(slurp(o.out / "metrics.csv") == slurp(again.out / "metrics.csv"));
  CHECK(slurp(o.out / "results.jsonl") == slurp(again.out / "results.jsonl"));
}

TEST_CASE("train over all targets") {
  test::ScratchDir dir("all");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "run");
  o.target = "all";
  o.strategy = "deep_all";
  REQUIRE(cmd_train(o, out, err) == 0);
  CHECK(harness::read_results(o.out / "results.jsonl").size() == 4);
  CHECK(fs::exists(o.out / "checker" / "metrics.csv"));
}

TEST_CASE("train rejects a bad tau before writing anything") {
  test::ScratchDir dir("badtau");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "run");
  o.strategy = "sggv";
  o.inputs = "raw,shape,texture";
  o.tau = 4;
  CHECK(cmd_train(o, out, err) == 2);
  CHECK(err.str().find("5..9") != std::string::npos);
  CHECK_FALSE(fs::exists(o.out));
  o.tau.reset();
  o.target = "nowhere";
  CHECK(cmd_train(o, out, err) == 2);
}

TEST_CASE("sweep-tau") {
  test::ScratchDir dir("sweep");
  std::ostringstream out, err;
  auto o = tiny(dir.path() / "run");
  o.inputs = "raw,shape,texture";
  o.target = "solid-color";

  o.taus = "4";
  CHECK(cmd_sweep_tau(o, out, err) == 2);
  CHECK(err.str().find("5..9") != std::string::npos);
  o.taus = "";
  CHECK(cmd_sweep_tau(o, out, err) != 0);
  CHECK_FALSE(fs::exists(o.out));

  o.taus = "5,6,7";
  REQUIRE(cmd_sweep_tau(o, out, err) == 0);
  const auto records = harness::read_results(o.out / "results.jsonl");
  REQUIRE(records.size() == 3);
  std::istringstream sweep(slurp(o.out / "sweep.csv"));
  std::string line;
  std::getline(sweep, line);
  std::vector<long> counts;
  while (std::getline(sweep, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    counts.push_back(std::stol(f[4]));
  }
  REQUIRE(counts.size() == 3);
  CHECK(counts[1] <= counts[0]);
  CHECK(counts[2] <= counts[1]);
}

TEST_CASE("report aggregates records") {
  test::ScratchDir dir("report");
  std::vector<harness::ResultRecord> records;
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    for (std::string strategy : {"deep_all", "sggv"})
      for (std::string target : {"a", "b", "c", "d"})
        records.push_back({target, strategy, strategy == "sggv" ? 6 : 0, seed, 10,
                           uniform(rng, 0, 1)});
  fs::create_directories(dir.path() / "x" / "y");
  for (std::size_t i = 0; i < records.size(); ++i)
    harness::append_results(dir.path() / (i % 2 ? "x" : "x/y") / "results.jsonl", records[i]);

  const auto rows = summarize(records);
  REQUIRE(rows.size() == 8);
  // Recompute one cell independently.
  std::vector<double> v;
  for (const auto& r : records)
    if (r.strategy == "sggv" && r.target == "c") v.push_back(r.test_acc);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const auto cell = std::find_if(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.strategy == "sggv(tau=6)" && r.target == "c";
  });
  REQUIRE(cell != rows.end());
  CHECK(cell->runs == 5);
  CHECK(cell->mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(cell->std == doctest::Approx(std::sqrt(ss / 4)).epsilon(1e-12));

  std::ostringstream out, err;
  REQUIRE(cmd_report(dir.path(), false, out, err) == 0);
  const std::string csv = slurp(dir.path() / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  const auto single = summarize({records[0]});
  CHECK(single[0].std == 0.0);
  CHECK(single[0].runs == 1);
}

TEST_CASE("report without results fails") {
  test::ScratchDir dir("empty");
  std::ostringstream out, err;
  CHECK(cmd_report(dir.path(), false, out, err) == 1);
  CHECK(err.str().find("no result") != std::string::npos);
}

TEST_CASE("report plots") {
  test::ScratchDir dir("plots");
  std::ostringstream out, err;
  auto o = tiny(dir.path());
  o.target = "checker";
  REQUIRE(cmd_train(o, out, err) == 0);
  REQUIRE(cmd_report(dir.path(), true, out, err) == 0);
  const std::string svg = slurp(dir.path() / "plots" / "metrics.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}
