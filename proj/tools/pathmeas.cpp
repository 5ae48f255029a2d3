// pathmeas: config-driven experiment runner for time-distributed measurement
// simulations. Subcommands: run, validate, scan.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 config error,
// 3 compute/io error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pathmeas/cli/config.hpp"
#include "pathmeas/cli/experiments.hpp"

namespace cli = pathmeas::cli;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string format = "csv";
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* copt = cmd->add_option("--config", args.config_path,
                               "Path to the experiment config (JSON)");
  if (config_required) copt->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "Seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads,
                  "Worker threads (fallback: PATHMEAS_THREADS, default 1)");
  cmd->add_option("--format", args.format, "Data table format")
      ->check(CLI::IsMember({"csv", "json"}));
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PATHMEAS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

int execute(const CommonArgs& args, const std::string& forced_kind) {
  cli::ExperimentConfig cfg =
      args.config_path.empty()
          ? cli::parse_config(nlohmann::json{{"experiment", forced_kind}})
          : cli::load_config(args.config_path);
  if (!forced_kind.empty() && cfg.experiment != forced_kind)
    throw cli::ConfigError("subcommand expects experiment kind '" +
                           forced_kind + "', config says '" + cfg.experiment +
                           "'");

  cli::RunOptions opt;
  if (!args.out_dir.empty()) opt.out_dir = args.out_dir;
  if (args.seed_set) opt.seed_override = args.seed;
  opt.threads = resolve_threads(args.threads);
  opt.format = args.format;

  cli::RunReport report = cli::run_experiment(cfg, opt);

  const std::string dir = opt.out_dir.value_or(cfg.out_dir);
  const auto report_path =
      std::filesystem::path(dir) / (cfg.prefix + "_report.json");
  report.write(report_path);
  report.outputs.push_back(report_path.string());

  for (const auto& c : report.checks)
    std::printf("%-38s value=%-22.15g ref=%-22.15g tol=%-12.5g %s\n",
                c.name.c_str(), c.value, c.reference, c.tolerance,
                c.pass ? "PASS" : "FAIL");
  std::printf("report: %s (%.2fs)\n", report_path.string().c_str(),
              report.wall_seconds);
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint quantum-amplitude statistics for measurements "
               "distributed in time"};
  app.require_subcommand(1);

  CommonArgs run_args, validate_args, scan_args;
  auto* run_cmd = app.add_subcommand("run", "Run the configured experiment");
  add_common_flags(run_cmd, run_args, /*config_required=*/true);
  auto* validate_cmd =
      app.add_subcommand("validate", "Run the built-in check battery");
  add_common_flags(validate_cmd, validate_args, /*config_required=*/false);
  auto* scan_cmd = app.add_subcommand("scan", "Run a parameter scan");
  add_common_flags(scan_cmd, scan_args, /*config_required=*/true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return execute(run_args, "");
    if (validate_cmd->parsed()) return execute(validate_args, "validate");
    return execute(scan_args, "scan");
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cli::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const cli::ComputeError& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return 3;
  } catch (const pathmeas::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
