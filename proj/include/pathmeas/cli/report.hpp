#pragma once

// Run report: config echo, one entry per check (name, computed value,
// reference, tolerance, pass/fail), wall time, emitted files.

#include <string>
#include <vector>

#include "pathmeas/cli/csv.hpp"
#include "json.hpp"

namespace pathmeas::cli {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunReport {
  nlohmann::json config_echo;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  /// Adds a check that passes when |value - reference| <= tolerance.
  void check_abs(const std::string& name, double value, double reference,
                 double tolerance) {
    checks.push_back({name, value, reference, tolerance,
                      std::abs(value - reference) <= tolerance});
  }

  /// Adds a check that passes when the value is below the bound.
  void check_below(const std::string& name, double value, double bound) {
    checks.push_back({name, value, 0.0, bound, value <= bound});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config"] = config_echo;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"value", c.value},
                             {"reference", c.reference},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
    j["wall_time_seconds"] = wall_seconds;
    j["outputs"] = outputs;
    j["all_pass"] = all_pass();
    return j;
  }

  void write(const std::filesystem::path& path) const {
    detail::atomic_write(path, to_json().dump(2) + "\n");
  }
};

}  // namespace pathmeas::cli
