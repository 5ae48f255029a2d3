#pragma once

// Experiment runners behind the CLI: each takes a validated config, computes,
// writes plot-ready tables plus a JSON report, and returns the report.

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pathmeas/classical.hpp"
#include "pathmeas/cli/config.hpp"
#include "pathmeas/cli/csv.hpp"
#include "pathmeas/cli/report.hpp"
#include "pathmeas/core.hpp"
#include "pathmeas/nslit.hpp"
#include "pathmeas/pathint.hpp"
#include "pathmeas/quadrature.hpp"
#include "pathmeas/records.hpp"
#include "pathmeas/scatter.hpp"

namespace pathmeas::cli {

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
  std::string format = "csv";  // csv | json
};

namespace detail {

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  RunReport& report;

  std::filesystem::path out_path(const std::string& suffix) const {
    const std::string dir = opt.out_dir.value_or(cfg.out_dir);
    return std::filesystem::path(dir) / (cfg.prefix + "_" + suffix);
  }

  std::uint64_t seed() const { return opt.seed_override.value_or(cfg.seed); }

  void emit(const Table& table, const std::string& stem) {
    const std::string ext = (opt.format == "json") ? ".json" : ".csv";
    const auto path = out_path(stem + ext);
    if (opt.format == "json") emit_json_table(table, path);
    else emit_csv(table, path);
    report.outputs.push_back(path.string());
  }
};

inline WaveFunction gaussian_packet(const SpatialGrid& grid, double x0,
                                    double p0, double sigma0,
                                    const Units& units) {
  std::vector<Complex> amps(grid.total_points());
  for (std::size_t j = 0; j < amps.size(); ++j) {
    const double x = grid.coord(static_cast<int>(j));
    const double u = (x - x0) / (2.0 * sigma0);
    amps[j] = std::polar(std::exp(-u * u), p0 * x / units.hbar);
  }
  return normalize(WaveFunction(grid, std::move(amps)));
}

inline double wrapped_phase_diff(Complex a, Complex b) {
  return std::abs(std::arg(a * std::conj(b)));
}

// --- experiment bodies -----------------------------------------------------

inline void run_propagate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params, {"x0", "p0", "sigma0", "n_steps"},
               "params(propagate)");
  const double x0 = get_or<double>(cfg.params, "x0", 0.0);
  const double p0 = get_or<double>(cfg.params, "p0", 0.0);
  const double sigma0 = get_positive(cfg.params, "sigma0", 1.0);
  const int n_steps = get_or<int>(cfg.params, "n_steps", 200);
  if (n_steps < 1) throw ConfigError("key 'n_steps' must be >= 1");

  const SpatialGrid grid = cfg.grid();
  const WaveFunction psi0 = gaussian_packet(grid, x0, p0, sigma0, cfg.units);
  const WaveFunction psi =
      pathint::grid_propagate(psi0, cfg.potential, cfg.t_final, n_steps,
                              cfg.units);

  Table t;
  t.columns = {"x", "density_initial", "density_final", "re", "im"};
  double mean = 0.0, mean2 = 0.0;
  const double h = grid.spacing();
  for (std::size_t j = 0; j < psi.amplitudes.size(); ++j) {
    const double x = grid.coord(static_cast<int>(j));
    const double d0 = std::norm(psi0.amplitudes[j]);
    const double d1 = std::norm(psi.amplitudes[j]);
    mean += x * d1 * h;
    mean2 += x * x * d1 * h;
    t.rows.push_back({x, d0, d1, psi.amplitudes[j].real(),
                      psi.amplitudes[j].imag()});
  }
  ctx.emit(t, "density");

  ctx.report.check_abs("norm_preserved", l2_norm(psi), 1.0, 1e-6);
  if (cfg.potential_kind == "free") {
    const double spread = cfg.units.hbar * cfg.t_final /
                          (2.0 * cfg.units.mass * sigma0);
    const double var_ref = sigma0 * sigma0 + spread * spread;
    ctx.report.check_abs("free_width_sq", mean2 - mean * mean, var_ref,
                         1e-3 * var_ref);
  }
}

inline void run_zfunctional(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params,
               {"x_i", "x_f", "n_steps", "kick_times", "kick_values"},
               "params(zfunctional)");
  const double x_i = get_or<double>(cfg.params, "x_i", 0.0);
  const double x_f = get_or<double>(cfg.params, "x_f", 1.0);
  const int n_steps = get_or<int>(cfg.params, "n_steps", 8);
  if (n_steps < 1) throw ConfigError("key 'n_steps' must be >= 1");
  pathint::KickSchedule kicks;
  kicks.times = get_or<std::vector<double>>(cfg.params, "kick_times", {});
  kicks.kicks = get_or<std::vector<double>>(cfg.params, "kick_values", {});

  const Complex z = pathint::z_functional(x_i, x_f, cfg.t_final, kicks,
                                          cfg.potential, n_steps, cfg.grid(),
                                          cfg.units);
  const Complex zs = pathint::semiclassical_z(x_i, x_f, cfg.t_final, kicks,
                                              cfg.potential, cfg.units);

  Table t;
  t.columns = {"z_re", "z_im", "z_abs", "z_phase",
               "zsemi_re", "zsemi_im", "zsemi_abs", "zsemi_phase"};
  t.rows.push_back({z.real(), z.imag(), std::abs(z), std::arg(z), zs.real(),
                    zs.imag(), std::abs(zs), std::arg(zs)});
  ctx.emit(t, "zfunctional");

  if (kicks.times.empty()) {
    ctx.report.check_below("semiclassical_modulus_rel_err",
                           std::abs(std::abs(z) - std::abs(zs)) / std::abs(zs),
                           0.05);
    ctx.report.check_below("semiclassical_phase_err", wrapped_phase_diff(z, zs),
                           0.05);
  }
}

inline void run_joint_amplitude(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params, {"x_i", "x_f", "n_steps", "offsets"},
               "params(joint-amplitude)");
  const double x_i = get_or<double>(cfg.params, "x_i", 0.0);
  const double x_f = get_or<double>(cfg.params, "x_f", 1.0);
  const int n_steps = get_or<int>(cfg.params, "n_steps", 128);
  if (n_steps < 1) throw ConfigError("key 'n_steps' must be >= 1");
  const auto offsets =
      get_or<std::vector<double>>(cfg.params, "offsets", {0.0, 0.1, 0.2});

  const double guess = cfg.units.mass * (x_f - x_i) / cfg.t_final;
  const Trajectory r_cl = classical::solve_bvp(
      cfg.potential, x_i, x_f, cfg.t_final, n_steps, guess, cfg.units);

  Table t;
  t.columns = {"offset", "prefactor_re", "prefactor_im", "action_phase",
               "log_weight", "abs_value"};
  double base_abs = 0.0;
  double last_abs = 0.0, last_offset = 0.0;
  for (double c : offsets) {
    scatter::ProbeRecord rec = scatter::record_on_path(r_cl, cfg.alpha);
    for (auto& r : rec.readouts) r.x += c;
    const auto ja = scatter::joint_amplitude(rec, x_i, x_f, cfg.t_final,
                                             cfg.potential, cfg.alpha,
                                             cfg.units);
    t.rows.push_back({c, ja.prefactor.real(), ja.prefactor.imag(),
                      ja.action_phase, ja.log_weight, std::abs(ja.value)});
    if (c == offsets.front()) base_abs = std::abs(ja.value);
    last_abs = std::abs(ja.value);
    last_offset = c;
    const double recon = std::abs(
        ja.prefactor * std::polar(std::exp(ja.log_weight), ja.action_phase) -
        ja.value);
    ctx.report.check_below("decomposition_residual_c=" + format_double(c),
                           recon, 1e-12);
  }
  ctx.emit(t, "joint_amplitude");

  if (offsets.size() >= 2 && offsets.front() == 0.0 && base_abs > 0.0) {
    const double expected =
        std::exp(-2.0 * M_PI * M_PI * cfg.t_final * last_offset * last_offset /
                 (3.0 * cfg.alpha * cfg.alpha));
    ctx.report.check_abs("gaussian_suppression_ratio", last_abs / base_abs,
                         expected, 1e-10);
  }
}

inline void run_nslit(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params,
               {"n_slits", "separation", "positions", "slit_width",
                "screen_distance", "de_broglie", "screen", "detector", "mode"},
               "params(nslit)");
  const int n = get_or<int>(cfg.params, "n_slits", 2);
  if (n < 1) throw ConfigError("key 'n_slits' must be >= 1");

  nslit::SlitConfig sc;
  sc.n_slits = n;
  if (cfg.params.contains("positions")) {
    sc.positions = cfg.params.at("positions").get<std::vector<double>>();
  } else {
    const double d = get_positive(cfg.params, "separation", 1.0);
    for (int k = 0; k < n; ++k)
      sc.positions.push_back((k - 0.5 * (n - 1)) * d);
  }
  sc.slit_width = get_positive(cfg.params, "slit_width", 0.1);
  sc.screen_distance = get_positive(cfg.params, "screen_distance", 100.0);
  sc.de_broglie = get_positive(cfg.params, "de_broglie", 0.5);
  sc.validate();

  double screen_min = -2.0, screen_max = 2.0;
  int screen_points = 401;
  if (cfg.params.contains("screen")) {
    const json& s = cfg.params.at("screen");
    require_keys(s, {"min", "max", "n_points"}, "params.screen");
    screen_min = get_or<double>(s, "min", screen_min);
    screen_max = get_or<double>(s, "max", screen_max);
    screen_points = get_or<int>(s, "n_points", screen_points);
    if (!(screen_max > screen_min) || screen_points < 2)
      throw ConfigError("params.screen: invalid range");
  }

  std::string detector_kind = "orthonormal";
  double overlap_c = 0.5;
  if (cfg.params.contains("detector")) {
    const json& d = cfg.params.at("detector");
    require_keys(d, {"kind", "overlap"}, "params.detector");
    detector_kind = get_or<std::string>(d, "kind", detector_kind);
    overlap_c = get_or<double>(d, "overlap", overlap_c);
  }
  std::optional<nslit::DetectorSet> det;
  if (detector_kind == "orthonormal") det = nslit::DetectorSet::orthonormal(n);
  else if (detector_kind == "identical") det = nslit::DetectorSet::identical(n);
  else if (detector_kind == "overlap") {
    if (n != 2)
      throw ConfigError("params.detector: overlap family needs n_slits = 2");
    det = nslit::DetectorSet::overlap_pair(overlap_c);
  } else {
    throw ConfigError("params.detector: unknown kind '" + detector_kind + "'");
  }

  const auto mode_str = get_or<std::string>(cfg.params, "mode", "equal_weight");
  const auto mode = mode_str == "semiclassical"
                        ? nslit::AmplitudeMode::Semiclassical
                        : nslit::AmplitudeMode::EqualWeight;

  Table t;
  t.columns = {"x_s", "unmeasured", "conditional_0", "averaged"};
  std::vector<double> averaged, unmeasured;
  const double dx = (screen_max - screen_min) / (screen_points - 1);
  for (int i = 0; i < screen_points; ++i) {
    const double x_s = screen_min + dx * i;
    const auto amps = nslit::slit_amplitudes(sc, x_s, cfg.units, mode);
    const double p0 = nslit::intensity_unmeasured(amps);
    const double pc = nslit::conditional_pattern(amps, *det, 0);
    const double pa = nslit::averaged_pattern(amps, *det);
    unmeasured.push_back(p0);
    averaged.push_back(pa);
    t.rows.push_back({x_s, p0, pc, pa});
  }
  ctx.emit(t, "nslit");

  if (n == 2 && mode == nslit::AmplitudeMode::EqualWeight) {
    const double vis = nslit::visibility(averaged);
    if (detector_kind == "orthonormal")
      ctx.report.check_below("visibility_orthogonal", vis, 1e-10);
    else if (detector_kind == "identical")
      ctx.report.check_abs("visibility_identical", vis,
                           nslit::visibility(unmeasured), 1e-10);
    else
      ctx.report.check_abs("visibility_overlap", vis, overlap_c, 1e-10);
  }
}

inline void run_records(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params,
               {"n_records", "x0", "p0", "fractions", "window_bins",
                "export_records"},
               "params(records)");
  const int n_records = get_or<int>(cfg.params, "n_records", 10000);
  if (n_records < 2) throw ConfigError("key 'n_records' must be >= 2");
  const double x0 = get_or<double>(cfg.params, "x0", 0.0);
  const double p0 = get_or<double>(cfg.params, "p0", 1.0);
  const auto fractions =
      get_or<std::vector<double>>(cfg.params, "fractions", {1.0, 0.5, 0.25});
  const int window_bins = get_or<int>(cfg.params, "window_bins", 8);

  const auto n_steps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
  if (n_steps < 1 ||
      std::abs(n_steps * cfg.dt - cfg.t_final) > 1e-9 * cfg.t_final)
    throw ConfigError("key 'dt' must divide 't_final' evenly");

  const Trajectory r_cl = classical::solve_ivp(cfg.potential, x0, p0,
                                               cfg.t_final, n_steps, cfg.units);
  const auto ens = records::sample_records(r_cl, cfg.alpha, cfg.dt, n_records,
                                           ctx.seed(), ctx.opt.threads);
  const auto stats = records::record_statistics(ens);

  const double var_ref =
      3.0 * cfg.alpha * cfg.alpha / (8.0 * M_PI * M_PI * cfg.dt);
  Table t;
  t.columns = {"bin", "time", "mean_x", "mean_y", "mean_z",
               "var_x", "var_y", "var_z", "var_reference"};
  double var_acc = 0.0;
  double worst_bias = 0.0;
  for (std::size_t j = 0; j < stats.mean.size(); ++j) {
    t.rows.push_back({static_cast<double>(j), r_cl.times[j], stats.mean[j].x,
                      stats.mean[j].y, stats.mean[j].z, stats.variance[j].x,
                      stats.variance[j].y, stats.variance[j].z, var_ref});
    var_acc += (stats.variance[j].x + stats.variance[j].y +
                stats.variance[j].z) / 3.0;
    const Vec3 bias = stats.mean[j] - r_cl.positions[j];
    worst_bias = std::max({worst_bias, std::abs(bias.x), std::abs(bias.y),
                           std::abs(bias.z)});
  }
  var_acc /= static_cast<double>(stats.mean.size());
  ctx.emit(t, "records_stats");

  const double sigma = std::sqrt(var_ref);
  ctx.report.check_abs("variance_per_bin", var_acc, var_ref, 0.05 * var_ref);
  ctx.report.check_below("unbiasedness_worst_bin", worst_bias,
                         4.0 * sigma / std::sqrt(static_cast<double>(n_records)));
  double worst_auto = 0.0;
  for (std::size_t lag = 1; lag < stats.autocorr.size(); ++lag)
    worst_auto = std::max(worst_auto, std::abs(stats.autocorr[lag]));
  ctx.report.check_below(
      "whiteness_autocorr", worst_auto,
      4.0 / std::sqrt(static_cast<double>(n_records) *
                      static_cast<double>(r_cl.size())));

  double mean_neg_log = 0.0;
  for (const auto& rec : ens.records)
    mean_neg_log += -2.0 * scatter::continuum_weight(rec, r_cl, cfg.alpha);
  mean_neg_log /= static_cast<double>(n_records);
  const double ref = 1.5 * n_steps;
  ctx.report.check_abs("mean_log_weight", mean_neg_log, ref, 0.05 * ref);

  if (get_or<bool>(cfg.params, "export_records", false)) {
    Table raw;
    raw.columns = {"record", "bin", "time", "x", "y", "z"};
    for (std::size_t k = 0; k < ens.records.size(); ++k) {
      const auto& rec = ens.records[k];
      for (std::size_t j = 0; j < rec.size(); ++j)
        raw.rows.push_back({static_cast<double>(k), static_cast<double>(j),
                            rec.times[j], rec.readouts[j].x,
                            rec.readouts[j].y, rec.readouts[j].z});
    }
    ctx.emit(raw, "records_raw");
  }

  const auto red = records::redundancy_report(ens, fractions, window_bins,
                                              ctx.seed() ^ 0xF00DULL);
  Table rt;
  rt.columns = {"fraction", "rms_error"};
  for (const auto& rp : red) rt.rows.push_back({rp.fraction, rp.rms_error});
  ctx.emit(rt, "redundancy");
  if (!red.empty() && red.front().fraction == 1.0) {
    for (std::size_t i = 1; i < red.size(); ++i) {
      const double expect = 1.0 / std::sqrt(red[i].fraction);
      ctx.report.check_abs(
          "redundancy_scaling_f=" + detail::format_double(red[i].fraction),
          red[i].rms_error / red.front().rms_error, expect, 0.2 * expect);
    }
  }
}

inline void run_scan(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params,
               {"target", "hbar_max", "hbar_min", "n_scan", "x_i", "x_f",
                "n_steps"},
               "params(scan)");
  const auto target =
      get_or<std::string>(cfg.params, "target", "stationary_dominance");
  if (target != "stationary_dominance")
    throw ConfigError("params.target: unknown scan target '" + target + "'");
  const double hbar_max = get_positive(cfg.params, "hbar_max", 10.0);
  const double hbar_min = get_positive(cfg.params, "hbar_min", 0.3125);
  const int n_scan = get_or<int>(cfg.params, "n_scan", 6);
  if (n_scan < 2) throw ConfigError("key 'n_scan' must be >= 2");
  if (!(hbar_max > hbar_min))
    throw ConfigError("key 'hbar_max' must exceed 'hbar_min'");
  const double x_i = get_or<double>(cfg.params, "x_i", -1.0);
  const double x_f = get_or<double>(cfg.params, "x_f", 1.0);
  const int n_steps = get_or<int>(cfg.params, "n_steps", 4);

  Table t;
  t.columns = {"hbar", "dominance"};
  std::vector<double> dom;
  const double ratio = std::pow(hbar_min / hbar_max,
                                1.0 / static_cast<double>(n_scan - 1));
  for (int i = 0; i < n_scan; ++i) {
    Units u = cfg.units;
    u.hbar = hbar_max * std::pow(ratio, i);
    const double d = pathint::stationary_dominance(
        x_i, x_f, cfg.t_final, n_steps, cfg.grid(), cfg.potential, u);
    dom.push_back(d);
    t.rows.push_back({u.hbar, d});
  }
  ctx.emit(t, "scan");

  double worst_drop = 0.0;
  for (std::size_t i = 1; i < dom.size(); ++i)
    worst_drop = std::min(worst_drop, dom[i] - dom[i - 1]);
  ctx.report.check_below("dominance_monotone_drop", -worst_drop, 1e-12);
}

inline void run_validate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_keys(cfg.params, {}, "params(validate)");
  RunReport& rep = ctx.report;
  const Units natural{};

  // Kernel and special-function identities.
  rep.check_abs("kernel_free_modulus",
                std::abs(pathint::short_time_kernel(0.0, 0.0, 1.0,
                                                    Potential::free())),
                1.0 / std::sqrt(2.0 * M_PI), 1e-12);
  rep.check_abs("zeta2", scatter::zeta_even(1), M_PI * M_PI / 6.0, 1e-12);
  rep.check_abs("zeta_identity_4zeta2", 4.0 * scatter::zeta_even(1),
                2.0 * M_PI * M_PI / 3.0, 1e-12);

  {
    std::mt19937_64 eng(ctx.seed());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 dr{u(eng), u(eng), u(eng)};
      const double lam = 0.5 + 1.5 * std::abs(u(eng));
      const Complex closed = scatter::angular_kick_integral(dr, lam);
      const Complex quad = quadrature::spherical_kick_integral(dr, lam);
      worst = std::max(worst, std::abs(closed - quad));
    }
    rep.check_below("angular_integral_max_abs_err", worst, 1e-8);
  }

  {
    const auto grid = SpatialGrid::make_1d(-40.0, 41.0, 6481);
    const Complex z = pathint::z_functional(0.0, 1.0, 1.0, {},
                                            Potential::free(), 2, grid,
                                            natural);
    const Complex ref = std::polar(1.0 / std::sqrt(2.0 * M_PI),
                                   0.5 - 0.25 * M_PI);
    rep.check_below("free_z_modulus_rel_err",
                    std::abs(std::abs(z) - std::abs(ref)) / std::abs(ref),
                    0.02);
    rep.check_below("free_z_phase_err", wrapped_phase_diff(z, ref), 0.02);
  }

  {
    const auto pot = Potential::harmonic(1.0);
    const auto traj = classical::solve_bvp(pot, 0.0, 1.0, 1.0, 2000, 1.0,
                                           natural);
    const double s = classical::action(traj, pot, natural).value;
    const double ref =
        0.5 / std::sin(1.0) * ((0.0 + 1.0) * std::cos(1.0) - 0.0);
    rep.check_below("harmonic_action_rel_err", std::abs(s - ref) / std::abs(ref),
                    1e-5);
    rep.check_below("bvp_endpoint_residual", std::abs(traj.x(2000) - 1.0),
                    1e-8);

    const auto pref = classical::van_vleck_prefactor(pot, traj, natural);
    const double mod_ref = std::sqrt(1.0 / (2.0 * M_PI * std::sin(1.0)));
    rep.check_abs("vanvleck_harmonic_modulus", std::abs(pref.value), mod_ref,
                  1e-6);
    rep.check_abs("packet_width_harmonic",
                  classical::packet_width(pot, traj, 0.5, natural),
                  std::sqrt(0.5), 1e-9);
  }

  {
    const auto pot = Potential::quartic(0.0, 0.25);
    const auto traj = classical::solve_ivp(pot, 1.0, 0.0, 1.0, 100, natural);
    rep.check_abs("classicality_quartic_n3",
                  classical::classicality_ratio(pot, traj, 0.0, 3, natural),
                  2.0 * std::pow(3.0, -0.25), 1e-9);
  }

  {
    const auto r_cl = classical::solve_ivp(Potential::free(), 0.0, 0.5, 1.0,
                                           32, natural);
    const double dt = 1.0 / 32.0;
    const auto ens = records::sample_records(r_cl, 0.4, dt, 2000, ctx.seed(),
                                             ctx.opt.threads);
    const auto stats = records::record_statistics(ens);
    const double var_ref = 3.0 * 0.16 / (8.0 * M_PI * M_PI * dt);
    double var_acc = 0.0;
    for (const auto& v : stats.variance) var_acc += (v.x + v.y + v.z) / 3.0;
    var_acc /= static_cast<double>(stats.variance.size());
    rep.check_abs("records_variance", var_acc, var_ref, 0.1 * var_ref);

    double mean_neg_log = 0.0;
    for (const auto& rec : ens.records)
      mean_neg_log += -2.0 * scatter::continuum_weight(rec, r_cl, 0.4);
    mean_neg_log /= static_cast<double>(ens.records.size());
    rep.check_abs("mean_log_weight", mean_neg_log, 1.5 * 32.0,
                  0.1 * 1.5 * 32.0);
  }

  {
    nslit::SlitConfig sc;
    sc.n_slits = 2;
    sc.positions = {-0.5, 0.5};
    sc.slit_width = 0.1;
    sc.screen_distance = 100.0;
    sc.de_broglie = 0.5;
    const double period = sc.de_broglie * sc.screen_distance / 1.0;
    auto pattern = [&](const nslit::DetectorSet& det) {
      std::vector<double> p;
      for (int i = 0; i <= 200; ++i) {
        const double x_s = -period + 2.0 * period * i / 200.0;
        const auto amps = nslit::slit_amplitudes(sc, x_s, natural,
                                                 nslit::AmplitudeMode::EqualWeight);
        p.push_back(nslit::averaged_pattern(amps, det));
      }
      return p;
    };
    rep.check_below("nslit_orthogonal_visibility",
                    nslit::visibility(pattern(nslit::DetectorSet::orthonormal(2))),
                    1e-10);
    rep.check_abs("nslit_overlap_visibility",
                  nslit::visibility(pattern(nslit::DetectorSet::overlap_pair(0.5))),
                  0.5, 1e-10);
  }

  {
    // Discrete probe product vs continuum weight on a smooth record.
    const int n = 512;
    const double t = 1.0, alpha = 0.8;
    std::vector<double> times(n + 1);
    std::vector<Vec3> pos(n + 1), mom(n + 1);
    for (int j = 0; j <= n; ++j) {
      times[static_cast<size_t>(j)] = t * j / n;
      pos[static_cast<size_t>(j)] = {0.3 * times[static_cast<size_t>(j)], 0, 0};
      mom[static_cast<size_t>(j)] = {0.3, 0, 0};
    }
    Trajectory r_cl(times, pos, mom, 1);
    scatter::ProbeRecord rec = scatter::record_on_path(r_cl, alpha);
    for (int j = 0; j <= n; ++j) {
      const double tau = rec.times[static_cast<size_t>(j)];
      rec.readouts[static_cast<size_t>(j)].x += 0.1 * std::sin(2.0 * M_PI * tau);
      rec.readouts[static_cast<size_t>(j)].y += 0.05 * std::cos(M_PI * tau);
    }
    const double dt = t / n;
    const double lambda = alpha / std::sqrt(dt);
    double discrete = 0.0;
    for (int j = 1; j <= n; ++j) {
      const Vec3 dr = rec.readouts[static_cast<size_t>(j)] -
                      r_cl.positions[static_cast<size_t>(j)];
      const Complex ij = scatter::angular_kick_integral(dr, lambda);
      const Complex norm = scatter::dropped_step_normalization(dr.z, lambda);
      discrete += std::log(std::abs(ij / norm));
    }
    const double cont = scatter::continuum_weight(rec, r_cl, alpha);
    rep.check_below("discrete_continuum_rel_err",
                    std::abs(discrete - cont) / std::abs(cont), 0.05);
  }

  {
    const auto lattice = SpatialGrid::make_1d(-1.3, 1.3, 33);
    double prev = -1.0;
    double worst_drop = 0.0;
    for (double hbar : {10.0, 5.0, 2.5, 1.25, 0.625}) {
      Units u;
      u.hbar = hbar;
      const double d = pathint::stationary_dominance(-1.0, 1.0, 1.0, 4,
                                                     lattice,
                                                     Potential::free(), u);
      if (prev >= 0.0) worst_drop = std::min(worst_drop, d - prev);
      prev = d;
    }
    rep.check_below("dominance_monotone_drop", -worst_drop, 1e-12);
  }

  Table t;
  t.columns = {"name", "value", "reference", "tolerance", "pass"};
  for (const auto& c : rep.checks)
    t.rows.push_back({c.name, c.value, c.reference, c.tolerance,
                      c.pass ? 1.0 : 0.0});
  ctx.emit(t, "validate");
}

}  // namespace detail

/// Executes the configured experiment; writes data tables and returns the
/// report (caller decides where the report JSON goes).
inline RunReport run_experiment(const ExperimentConfig& cfg,
                                const RunOptions& opt) {
  RunReport report;
  report.config_echo = cfg.echo;
  detail::Context ctx{cfg, opt, report};

  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.experiment == "propagate") detail::run_propagate(ctx);
    else if (cfg.experiment == "zfunctional") detail::run_zfunctional(ctx);
    else if (cfg.experiment == "joint-amplitude") detail::run_joint_amplitude(ctx);
    else if (cfg.experiment == "nslit") detail::run_nslit(ctx);
    else if (cfg.experiment == "records") detail::run_records(ctx);
    else if (cfg.experiment == "validate") detail::run_validate(ctx);
    else if (cfg.experiment == "scan") detail::run_scan(ctx);
    else throw ConfigError("unknown experiment kind '" + cfg.experiment + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ComputeError(std::string("[") + cfg.experiment + "] " + e.what());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace pathmeas::cli
