#pragma once

// Experiment configuration: one JSON file, schema-checked before any
// computation, unknown keys rejected with the offending key named. All
// defaults are materialized into the echo so a report reproduces the run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pathmeas/core.hpp"
#include "json.hpp"

namespace pathmeas::cli {

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct ComputeError : Error {
  explicit ComputeError(const std::string& msg) : Error(msg) {}
};

using json = nlohmann::json;

namespace detail {

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& scope) {
  if (!obj.is_object())
    throw ConfigError(scope + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(scope + ": unknown key '" + it.key() + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

inline double get_positive(const json& obj, const std::string& key,
                           double fallback) {
  const double v = get_or<double>(obj, key, fallback);
  if (!(v > 0.0))
    throw ConfigError("key '" + key + "' must be positive");
  return v;
}

}  // namespace detail

struct ExperimentConfig {
  std::string experiment;
  Units units;
  Potential potential = Potential::free();
  std::string potential_kind = "free";
  double grid_min = -10.0, grid_max = 10.0;
  int grid_points = 256;
  double alpha = 0.5;
  double lambda_p = 1.0;
  double dt = 1.0 / 64.0;
  double t_final = 1.0;
  std::uint64_t seed = 20270117ULL;
  std::string out_dir = ".";
  std::string prefix = "run";
  json params = json::object();
  json echo;  // fully materialized configuration

  SpatialGrid grid() const {
    return SpatialGrid::make_1d(grid_min, grid_max, grid_points);
  }
};

inline Potential parse_potential(const json& p, std::string* kind_out) {
  detail::require_keys(p, {"kind", "omega", "mass", "a", "b"}, "potential");
  const auto kind = detail::get_or<std::string>(p, "kind", "free");
  if (kind_out) *kind_out = kind;
  if (kind == "free") return Potential::free();
  if (kind == "harmonic")
    return Potential::harmonic(detail::get_positive(p, "omega", 1.0),
                               detail::get_positive(p, "mass", 1.0));
  if (kind == "quartic")
    return Potential::quartic(detail::get_or<double>(p, "a", 0.0),
                              detail::get_or<double>(p, "b", 1.0));
  if (kind == "double_well")
    return Potential::double_well(detail::get_or<double>(p, "a", 1.0),
                                  detail::get_or<double>(p, "b", 1.0));
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

inline ExperimentConfig parse_config(const json& j) {
  static const std::set<std::string> top_keys = {
      "experiment", "units",  "potential", "grid",   "alpha", "lambda_p",
      "dt",         "t_final", "seed",     "output", "params"};
  detail::require_keys(j, top_keys, "config");

  ExperimentConfig cfg;
  if (!j.contains("experiment"))
    throw ConfigError("config: missing required key 'experiment'");
  cfg.experiment = j.at("experiment").get<std::string>();
  static const std::set<std::string> kinds = {
      "propagate", "zfunctional", "joint-amplitude", "nslit",
      "records",   "validate",    "scan"};
  if (!kinds.count(cfg.experiment))
    throw ConfigError("config: unknown experiment kind '" + cfg.experiment +
                      "'");

  if (j.contains("units")) {
    detail::require_keys(j.at("units"), {"hbar", "mass"}, "units");
    cfg.units.hbar = detail::get_positive(j.at("units"), "hbar", 1.0);
    cfg.units.mass = detail::get_positive(j.at("units"), "mass", 1.0);
  }
  if (j.contains("potential"))
    cfg.potential = parse_potential(j.at("potential"), &cfg.potential_kind);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::require_keys(g, {"min", "max", "n_points"}, "grid");
    cfg.grid_min = detail::get_or<double>(g, "min", cfg.grid_min);
    cfg.grid_max = detail::get_or<double>(g, "max", cfg.grid_max);
    cfg.grid_points = detail::get_or<int>(g, "n_points", cfg.grid_points);
    if (!(cfg.grid_max > cfg.grid_min))
      throw ConfigError("grid: key 'max' must exceed 'min'");
    if (cfg.grid_points < 2)
      throw ConfigError("grid: key 'n_points' must be >= 2");
  }
  cfg.alpha = detail::get_positive(j, "alpha", cfg.alpha);
  cfg.lambda_p = detail::get_positive(j, "lambda_p", cfg.lambda_p);
  cfg.dt = detail::get_positive(j, "dt", cfg.dt);
  cfg.t_final = detail::get_positive(j, "t_final", cfg.t_final);
  cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed);
  if (j.contains("output")) {
    detail::require_keys(j.at("output"), {"dir", "prefix"}, "output");
    cfg.out_dir = detail::get_or<std::string>(j.at("output"), "dir", cfg.out_dir);
    cfg.prefix = detail::get_or<std::string>(j.at("output"), "prefix", cfg.prefix);
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object())
      throw ConfigError("params: expected an object");
    cfg.params = j.at("params");
  }

  // Materialized echo: every default made explicit.
  cfg.echo = json{
      {"experiment", cfg.experiment},
      {"units", {{"hbar", cfg.units.hbar}, {"mass", cfg.units.mass}}},
      {"potential", j.contains("potential") ? j.at("potential")
                                            : json{{"kind", "free"}}},
      {"grid",
       {{"min", cfg.grid_min}, {"max", cfg.grid_max},
        {"n_points", cfg.grid_points}}},
      {"alpha", cfg.alpha},
      {"lambda_p", cfg.lambda_p},
      {"dt", cfg.dt},
      {"t_final", cfg.t_final},
      {"seed", cfg.seed},
      {"output", {{"dir", cfg.out_dir}, {"prefix", cfg.prefix}}},
      {"params", cfg.params}};
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " +
                      e.what());
  }
  return parse_config(j);
}

}  // namespace pathmeas::cli
