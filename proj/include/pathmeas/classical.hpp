#pragma once

// Classical trajectories, actions, semiclassical prefactors and the
// localization diagnostics evaluated along them. 1D dynamics.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pathmeas/core.hpp"

namespace pathmeas::classical {

struct ActionValue {
  double value = 0.0;   // units of hbar once divided by it
  Trajectory path;
};

struct SemiclassicalPrefactor {
  Complex value;
  std::vector<double> gy_solution;  // f(tau) over the trajectory nodes
};

namespace detail {

struct State {
  double x, p;
};

inline State rhs(const Potential& v, double mass, const State& s) {
  return {s.p / mass, -v(s.x, 1)};
}

inline State rk4_step(const Potential& v, double mass, const State& s,
                      double h) {
  const State k1 = rhs(v, mass, s);
  const State k2 = rhs(v, mass, {s.x + 0.5 * h * k1.x, s.p + 0.5 * h * k1.p});
  const State k3 = rhs(v, mass, {s.x + 0.5 * h * k2.x, s.p + 0.5 * h * k2.p});
  const State k4 = rhs(v, mass, {s.x + h * k3.x, s.p + h * k3.p});
  return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.p + h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
}

}  // namespace detail

/// Integrates m x'' = -dV/dx with classic RK4 (global error O(dt^4)).
inline Trajectory solve_ivp(const Potential& v, double x0, double p0,
                            double t_final, int n_steps,
                            const Units& units = {}) {
  units.validate();
  if (n_steps < 1) throw InvalidArgument("solve_ivp: n_steps >= 1 required");
  if (!(t_final > 0.0)) throw InvalidArgument("solve_ivp: t_final > 0 required");

  const double h = t_final / n_steps;
  std::vector<double> times(static_cast<size_t>(n_steps) + 1);
  std::vector<Vec3> xs(times.size()), ps(times.size());
  detail::State s{x0, p0};
  times[0] = 0.0;
  xs[0] = {x0, 0, 0};
  ps[0] = {p0, 0, 0};
  for (int i = 1; i <= n_steps; ++i) {
    s = detail::rk4_step(v, units.mass, s, h);
    if (!std::isfinite(s.x) || !std::isfinite(s.p))
      throw NonFinite("solve_ivp: non-finite state at step " +
                      std::to_string(i));
    times[static_cast<size_t>(i)] = (i == n_steps) ? t_final : h * i;
    xs[static_cast<size_t>(i)] = {s.x, 0, 0};
    ps[static_cast<size_t>(i)] = {s.p, 0, 0};
  }
  return Trajectory(std::move(times), std::move(xs), std::move(ps), 1);
}

/// Shooting method for the two-point boundary problem x(0) = x_i,
/// x(t_final) = x_f. Secant iteration on the initial momentum starting from
/// initial_guess; converges to the classical branch nearest the guess.
inline Trajectory solve_bvp(const Potential& v, double x_i, double x_f,
                            double t_final, int n_steps, double initial_guess,
                            const Units& units = {}, int max_iter = 100) {
  units.validate();
  if (!(t_final > 0.0)) throw InvalidArgument("solve_bvp: t_final > 0 required");

  auto endpoint = [&](double p0) {
    return solve_ivp(v, x_i, p0, t_final, n_steps, units).x(n_steps);
  };

  double p_prev = initial_guess;
  double f_prev = endpoint(p_prev) - x_f;
  // Secant seed: a small momentum offset scaled to the problem.
  double p_cur = p_prev + std::max(1e-3, 1e-3 * std::abs(p_prev));
  double f_cur = endpoint(p_cur) - x_f;

  const double target = tol::bvp_residual * 1e-2;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(f_cur) < target)
      return solve_ivp(v, x_i, p_cur, t_final, n_steps, units);
    const double denom = f_cur - f_prev;
    if (std::abs(denom) < 1e-15 * std::max(1.0, std::abs(f_cur))) {
      // Degenerate shooting map: the endpoint does not respond to the
      // initial momentum (focal time) or the secant stalled.
      throw NoConvergence("solve_bvp: stalled, residual " +
                          std::to_string(std::abs(f_cur)));
    }
    const double p_next = p_cur - f_cur * (p_cur - p_prev) / denom;
    p_prev = p_cur;
    f_prev = f_cur;
    p_cur = p_next;
    f_cur = endpoint(p_cur) - x_f;
    if (!std::isfinite(f_cur))
      throw NonFinite("solve_bvp: trajectory diverged during shooting");
  }
  if (std::abs(f_cur) < tol::bvp_residual)
    return solve_ivp(v, x_i, p_cur, t_final, n_steps, units);
  throw NoConvergence("solve_bvp: no convergence after " +
                      std::to_string(max_iter) + " iterations, residual " +
                      std::to_string(std::abs(f_cur)));
}

/// Midpoint-rule action S = sum [ m v^2 / 2 - V(x_mid) ] dt with
/// v = (x_{j+1} - x_j)/dt; error O(dt^2). The discrete classical paths are
/// stationary points of exactly this sum.
inline ActionValue action(const Trajectory& traj, const Potential& v,
                          const Units& units = {}) {
  units.validate();
  traj.validate();
  if (traj.size() < 2) throw InvalidArgument("action: need >= 2 samples");
  const double dt = traj.dt();
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const double vel = (traj.x(j + 1) - traj.x(j)) / dt;
    const double xm = 0.5 * (traj.x(j) + traj.x(j + 1));
    s += (0.5 * units.mass * vel * vel - v(xm, 0)) * dt;
  }
  if (!std::isfinite(s)) throw NonFinite("action: non-finite value");
  return {s, traj};
}

/// Gel'fand-Yaglom route to the Van Vleck prefactor in 1D: solve
/// m f'' = -V''(x_cl(tau)) f with f(0) = 0, f'(0) = 1 and return
/// sqrt(m / (2 pi i hbar f(t))). The square-root branch is continued from
/// t -> 0+ (free-particle value); each zero of f along the way advances the
/// phase by -pi/2.
inline SemiclassicalPrefactor van_vleck_prefactor(const Potential& v,
                                                  const Trajectory& traj,
                                                  const Units& units = {}) {
  units.validate();
  traj.validate();
  if (traj.dim != 1)
    throw InvalidArgument("van_vleck_prefactor: 1D trajectories only");
  if (traj.size() < 2)
    throw InvalidArgument("van_vleck_prefactor: need >= 2 samples");

  const double dt = traj.dt();
  const double m = units.mass;
  std::vector<double> f(traj.size());
  f[0] = 0.0;
  double g = 1.0;  // f'
  int sign_flips = 0;

  auto curvature = [&](double t) {
    return v(traj.position_at(t, m).x, 2);
  };

  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const double t0 = traj.times[j];
    const double w0 = curvature(t0);
    const double wh = curvature(t0 + 0.5 * dt);
    const double w1 = curvature(t0 + dt);
    // RK4 for f'' = -(V''/m) f
    const double f0 = f[j];
    const double k1f = g, k1g = -(w0 / m) * f0;
    const double k2f = g + 0.5 * dt * k1g,
                 k2g = -(wh / m) * (f0 + 0.5 * dt * k1f);
    const double k3f = g + 0.5 * dt * k2g,
                 k3g = -(wh / m) * (f0 + 0.5 * dt * k2f);
    const double k4f = g + dt * k3g, k4g = -(w1 / m) * (f0 + dt * k3f);
    f[j + 1] = f0 + dt / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    g += dt / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
    if (j > 0 && f[j] != 0.0 && f[j + 1] != 0.0 &&
        std::signbit(f[j]) != std::signbit(f[j + 1]))
      ++sign_flips;
  }

  const double f_end = f.back();
  if (std::abs(f_end) < tol::focal_point)
    throw FocalPoint("van_vleck_prefactor: focal point, |f(t)| = " +
                     std::to_string(std::abs(f_end)));

  const double modulus = std::sqrt(m / (2.0 * M_PI * units.hbar * std::abs(f_end)));
  const double phase = -0.25 * M_PI - 0.5 * M_PI * sign_flips;
  return {std::polar(modulus, phase), std::move(f)};
}

/// Wave-packet width around the classical path from the local curvature:
/// sigma(tau) = sqrt( hbar / (2 sqrt(m |V''(x_cl(tau))|)) ).
inline double packet_width(const Potential& v, const Trajectory& traj,
                           double tau, const Units& units = {}) {
  units.validate();
  const double x = traj.position_at(tau, units.mass).x;
  const double curv = std::abs(v(x, 2));
  if (curv < tol::flat_potential)
    throw FlatPotential("packet_width: |V''| < 1e-12, width undefined");
  return std::sqrt(units.hbar / (2.0 * std::sqrt(units.mass * curv)));
}

/// Localization criterion: size of the n-th order change of the potential
/// over the packet width relative to the second-order change,
///   (|V^(n)| / |V''|) * ( hbar / sqrt(m |V''|) )^(n/2 - 1),  n in {3, 4}.
/// Small values mean the quadratic expansion around the classical path holds.
inline double classicality_ratio(const Potential& v, const Trajectory& traj,
                                 double tau, int n, const Units& units = {}) {
  units.validate();
  if (n != 3 && n != 4)
    throw InvalidArgument("classicality_ratio: n must be 3 or 4");
  const double x = traj.position_at(tau, units.mass).x;
  const double curv = std::abs(v(x, 2));
  if (curv < tol::flat_potential)
    throw FlatPotential("classicality_ratio: |V''| < 1e-12");
  const double dn = std::abs(v(x, n));
  const double scale = units.hbar / std::sqrt(units.mass * curv);
  return (dn / curv) * std::pow(scale, 0.5 * n - 1.0);
}

}  // namespace pathmeas::classical
