#include "catch_amalgamated.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "pathmeas/cli/config.hpp"
#include "pathmeas/cli/csv.hpp"
#include "pathmeas/cli/experiments.hpp"
#include "pathmeas/cli/report.hpp"

using namespace pathmeas;
namespace cli = pathmeas::cli;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path p = fs::temp_directory_path() /
                     ("pathmeas_test_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("emit_csv") {
  const auto dir = temp_dir();
  SECTION("empty table is a header-only file") {
    cli::Table t;
    t.columns = {"col"};
    cli::emit_csv(t, dir / "empty.csv");
    CHECK(slurp(dir / "empty.csv") == "col\n");
  }
  SECTION("single value") {
    cli::Table t;
    t.columns = {"col"};
    t.rows.push_back({0.5});
    cli::emit_csv(t, dir / "one.csv");
    CHECK(slurp(dir / "one.csv") == "col\n0.5\n");
  }
  SECTION("round trip is bit exact") {
    cli::Table t;
    t.columns = {"v"};
    const double values[] = {M_PI, 1e-300, -0.1, 3.0, 1.0 / 3.0,
                             6.02214076e23, -0.0};
    for (double v : values) t.rows.push_back({v});
    cli::emit_csv(t, dir / "rt.csv");

    std::ifstream in(dir / "rt.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "v");
    for (double v : values) {
      REQUIRE(std::getline(in, line));
      CHECK(std::strtod(line.c_str(), nullptr) == v);
    }
  }
  SECTION("strings with commas are quoted") {
    cli::Table t;
    t.columns = {"name", "x"};
    t.rows.push_back({std::string("a,b"), 1.0});
    cli::emit_csv(t, dir / "q.csv");
    CHECK(slurp(dir / "q.csv") == "name,x\n\"a,b\",1\n");
  }
  SECTION("ragged rows are rejected") {
    cli::Table t;
    t.columns = {"a", "b"};
    t.rows.push_back({1.0});
    CHECK_THROWS_AS(cli::emit_csv(t, dir / "bad.csv"), InvalidArgument);
  }
}

TEST_CASE("config parsing") {
  SECTION("minimal config materializes defaults") {
    const auto cfg = cli::parse_config({{"experiment", "validate"}});
    CHECK(cfg.experiment == "validate");
    CHECK(cfg.units.hbar == 1.0);
    CHECK(cfg.echo.contains("seed"));
    CHECK(cfg.echo.contains("grid"));
    CHECK(cfg.echo.at("alpha").get<double>() > 0.0);
  }
  SECTION("the materialized echo reproduces the run") {
    const auto cfg = cli::parse_config(
        {{"experiment", "records"}, {"alpha", 0.7}, {"dt", 0.25}});
    const auto replay = cli::parse_config(cfg.echo);
    CHECK(replay.echo == cfg.echo);
    CHECK(replay.alpha == cfg.alpha);
    CHECK(replay.seed == cfg.seed);
  }
  SECTION("unknown keys are rejected by name") {
    try {
      cli::parse_config({{"experiment", "validate"}, {"alphaa", 1.0}});
      FAIL("expected ConfigError");
    } catch (const cli::ConfigError& e) {
      CHECK(std::string(e.what()).find("alphaa") != std::string::npos);
    }
  }
  SECTION("nonpositive alpha is rejected by key name") {
    try {
      cli::parse_config({{"experiment", "records"}, {"alpha", -0.5}});
      FAIL("expected ConfigError");
    } catch (const cli::ConfigError& e) {
      CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
  }
  SECTION("unknown experiment kind") {
    CHECK_THROWS_AS(cli::parse_config({{"experiment", "nope"}}),
                    cli::ConfigError);
  }
  SECTION("missing config file") {
    CHECK_THROWS_AS(cli::load_config("/definitely/not/here.json"),
                    cli::ConfigError);
  }
}

TEST_CASE("validate experiment: built-in battery passes") {
  auto cfg = cli::parse_config({{"experiment", "validate"}});
  cli::RunOptions opt;
  opt.out_dir = temp_dir().string();
  const auto report = cli::run_experiment(cfg, opt);
  for (const auto& c : report.checks) {
    INFO(c.name << " value=" << c.value << " ref=" << c.reference
                << " tol=" << c.tolerance);
    CHECK(c.pass);
  }
  CHECK(report.all_pass());
  // Every check appears exactly once.
  std::set<std::string> names;
  for (const auto& c : report.checks) CHECK(names.insert(c.name).second);
  CHECK(!report.outputs.empty());
  const auto j = report.to_json();
  CHECK(j.contains("config"));
  CHECK(j.at("all_pass").get<bool>());
}

TEST_CASE("scan experiment: dominance column is monotone") {
  auto cfg = cli::parse_config(
      {{"experiment", "scan"},
       {"grid", {{"min", -1.3}, {"max", 1.3}, {"n_points", 33}}},
       {"t_final", 1.0},
       {"params",
        {{"hbar_max", 10.0}, {"hbar_min", 0.3125}, {"n_scan", 6},
         {"x_i", -1.0}, {"x_f", 1.0}, {"n_steps", 4}}}});
  cli::RunOptions opt;
  const auto dir = temp_dir();
  opt.out_dir = dir.string();
  const auto report = cli::run_experiment(cfg, opt);
  CHECK(report.all_pass());
  CHECK(fs::exists(dir / "run_scan.csv"));
  const auto csv = slurp(dir / "run_scan.csv");
  CHECK(csv.rfind("hbar,dominance\n", 0) == 0);
}

TEST_CASE("records experiment end to end") {
  auto cfg = cli::parse_config(
      {{"experiment", "records"},
       {"alpha", 0.5},
       {"dt", 1.0 / 64},
       {"t_final", 1.0},
       {"seed", 424242},
       {"params", {{"n_records", 10000}, {"x0", 0.0}, {"p0", 1.0},
                   {"export_records", false}}}});
  cli::RunOptions opt;
  const auto dir = temp_dir();
  opt.out_dir = dir.string();
  opt.threads = 2;
  const auto report = cli::run_experiment(cfg, opt);
  for (const auto& c : report.checks) {
    INFO(c.name << " value=" << c.value << " ref=" << c.reference);
    CHECK(c.pass);
  }
  CHECK(fs::exists(dir / "run_records_stats.csv"));
  CHECK(fs::exists(dir / "run_redundancy.csv"));
}

TEST_CASE("records experiment can export the raw ensemble") {
  auto cfg = cli::parse_config(
      {{"experiment", "records"},
       {"alpha", 0.5},
       {"dt", 0.125},
       {"t_final", 1.0},
       {"params", {{"n_records", 4}, {"export_records", true},
                   {"fractions", {1.0}}, {"window_bins", 4}}}});
  cli::RunOptions opt;
  const auto dir = temp_dir();
  opt.out_dir = dir.string();
  cli::run_experiment(cfg, opt);
  REQUIRE(fs::exists(dir / "run_records_raw.csv"));
  const auto csv = slurp(dir / "run_records_raw.csv");
  CHECK(csv.rfind("record,bin,time,x,y,z\n", 0) == 0);
  // 4 records x 9 bins plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 9);
}

TEST_CASE("joint-amplitude experiment checks its own decomposition") {
  auto cfg = cli::parse_config(
      {{"experiment", "joint-amplitude"},
       {"alpha", 0.8},
       {"t_final", 1.0},
       {"potential", {{"kind", "harmonic"}, {"omega", 1.0}}},
       {"params", {{"x_i", 0.0}, {"x_f", 1.0}, {"n_steps", 128},
                   {"offsets", {0.0, 0.2}}}}});
  cli::RunOptions opt;
  opt.out_dir = temp_dir().string();
  const auto report = cli::run_experiment(cfg, opt);
  CHECK(report.all_pass());
}

TEST_CASE("compute errors carry the module origin") {
  // A focal-time boundary problem cannot be solved; the runner must wrap the
  // failure as ComputeError rather than exiting uncleanly.
  auto cfg = cli::parse_config(
      {{"experiment", "zfunctional"},
       {"potential", {{"kind", "harmonic"}, {"omega", 1.0}}},
       {"t_final", M_PI},
       {"grid", {{"min", -6.0}, {"max", 6.0}, {"n_points", 64}}},
       {"params", {{"x_i", 0.0}, {"x_f", 1.0}, {"n_steps", 4}}}});
  cli::RunOptions opt;
  opt.out_dir = temp_dir().string();
  CHECK_THROWS_AS(cli::run_experiment(cfg, opt), cli::ComputeError);
}

TEST_CASE("json table format") {
  auto cfg = cli::parse_config({{"experiment", "scan"},
                                {"grid", {{"min", -1.3}, {"max", 1.3},
                                          {"n_points", 33}}},
                                {"params", {{"n_scan", 3}, {"n_steps", 4}}}});
  cli::RunOptions opt;
  const auto dir = temp_dir();
  opt.out_dir = dir.string();
  opt.format = "json";
  const auto report = cli::run_experiment(cfg, opt);
  CHECK(fs::exists(dir / "run_scan.json"));
  const auto j = nlohmann::json::parse(slurp(dir / "run_scan.json"));
  CHECK(j.at("columns").size() == 2);
  CHECK(j.at("rows").size() == 3);
}
