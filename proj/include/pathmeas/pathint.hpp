#pragma once

// Discrete path-integral engine: short-time kernels, split-step grid
// propagation, exact lattice path sums, filter-function measurements and
// momentum-kick evolution.
//
// Two numerical routes coexist on purpose. grid_propagate (and everything
// built on it) uses split-step Fourier evolution, which preserves the norm to
// machine precision. z_functional uses transfer steps built from the literal
// short-time kernel so that it agrees with the brute-force lattice sum on the
// same discretization.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pathmeas/classical.hpp"
#include "pathmeas/core.hpp"

namespace pathmeas::pathint {

/// Momentum transfers dK (inverse length) applied at the listed times.
/// Each event multiplies the wave function by exp(-i dK x) at the nearest
/// time-grid node; events sharing a node compose additively.
struct KickSchedule {
  std::vector<double> times;
  std::vector<double> kicks;

  void validate(double t_final) const {
    if (times.size() != kicks.size())
      throw InvalidArgument("KickSchedule: times/kicks length mismatch");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(kicks[i]))
        throw InvalidArgument("KickSchedule: non-finite kick");
      if (!(times[i] > 0.0) || times[i] > t_final + tol::grid_uniformity)
        throw InvalidArgument("KickSchedule: time outside (0, t_final]");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw InvalidArgument("KickSchedule: times must strictly increase");
    }
  }
};

enum class FilterKind { None, Gaussian, TopHat };

/// Measurement filter Upsilon(xbar - x). Gaussian: exp(-u^2 / (4 w^2)), so
/// |Upsilon|^2 has standard deviation w. TopHat: indicator of |u| <= w.
/// `record` holds one readout xbar per measurement time.
struct FilterSpec {
  FilterKind kind = FilterKind::None;
  double width = 0.0;
  std::vector<double> record;

  double operator()(double u) const {
    switch (kind) {
      case FilterKind::None: return 1.0;
      case FilterKind::Gaussian: return std::exp(-u * u / (4.0 * width * width));
      case FilterKind::TopHat: return std::abs(u) <= width ? 1.0 : 0.0;
    }
    return 1.0;
  }
};

namespace detail {

inline void fft_inplace(std::vector<Complex>& data, int sign) {
  static std::mutex plan_mutex;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
  if (sign == FFTW_BACKWARD) {
    const double inv = 1.0 / static_cast<double>(data.size());
    for (Complex& c : data) c *= inv;
  }
}

/// FFT wavenumber for bin j of an N-point grid with spacing h.
inline double fft_wavenumber(std::size_t j, std::size_t n, double h) {
  const auto js = static_cast<std::ptrdiff_t>(j);
  const auto ns = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t f = (js < (ns + 1) / 2) ? js : js - ns;
  return 2.0 * M_PI * static_cast<double>(f) /
         (static_cast<double>(n) * h);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Neumaier compensated accumulator; keeps the brute-force lattice sums
// bit-stable against term-count growth.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct ComplexAccumulator {
  Accumulator re, im;
  void add(Complex v) {
    re.add(v.real());
    im.add(v.imag());
  }
  Complex value() const { return {re.value(), im.value()}; }
};

inline void check_edges(const std::vector<Complex>& amps, double threshold) {
  const double edge = std::max(std::abs(amps.front()), std::abs(amps.back()));
  if (edge > threshold)
    throw BoundaryLeak("grid evolution: edge amplitude " +
                       std::to_string(edge) + " exceeds threshold");
}

/// Split-step Fourier evolution over [0, t] in n_steps Strang steps.
/// Mutates amps in place on the given 1D grid.
inline void split_step_evolve(std::vector<Complex>& amps,
                              const SpatialGrid& grid, const Potential& v,
                              double t, int n_steps, const Units& units,
                              double leak_threshold) {
  if (n_steps == 0 || t == 0.0) return;
  const std::size_t n = amps.size();
  const double h = grid.spacing();
  const double dt = t / n_steps;

  std::vector<Complex> half_pot(n), kinetic(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.coord(static_cast<int>(j));
    half_pot[j] = std::polar(1.0, -v(x, 0) * dt / (2.0 * units.hbar));
    const double k = fft_wavenumber(j, n, h);
    kinetic[j] = std::polar(1.0, -units.hbar * k * k * dt / (2.0 * units.mass));
  }

  check_edges(amps, leak_threshold);
  for (int s = 0; s < n_steps; ++s) {
    for (std::size_t j = 0; j < n; ++j) amps[j] *= half_pot[j];
    fft_inplace(amps, FFTW_FORWARD);
    for (std::size_t j = 0; j < n; ++j) amps[j] *= kinetic[j];
    fft_inplace(amps, FFTW_BACKWARD);
    for (std::size_t j = 0; j < n; ++j) amps[j] *= half_pot[j];
    check_edges(amps, leak_threshold);
  }
}

}  // namespace detail

/// Short-time propagator of Eq.-of-motion discretization:
/// (m/(2 pi i hbar dt))^(d/2) exp( i m ((x_to-x_from)/dt)^2 dt / (2 hbar)
///                                - i V(x_to) dt / hbar ).
inline Complex short_time_kernel(double x_to, double x_from, double dt,
                                 const Potential& v, const Units& units = {},
                                 int dim = 1) {
  if (!(dt > 0.0)) throw InvalidArgument("short_time_kernel: dt > 0 required");
  units.validate();
  const double mod = std::pow(units.mass / (2.0 * M_PI * units.hbar * dt),
                              0.5 * dim);
  const double vel = (x_to - x_from) / dt;
  const double phase = 0.5 * units.mass * vel * vel * dt / units.hbar -
                       v(x_to, 0) * dt / units.hbar -
                       0.25 * M_PI * dim;  // principal branch of (1/i)^(d/2)
  return std::polar(mod, phase);
}

/// Split-step evolution of a grid state; norm is preserved to machine
/// precision. n_steps == 0 returns the input unchanged. Raises BoundaryLeak
/// when amplitude reaches the grid edges (the box must stay effectively
/// infinite for the result to mean anything).
inline WaveFunction grid_propagate(const WaveFunction& psi0, const Potential& v,
                                   double t_final, int n_steps,
                                   const Units& units = {},
                                   double leak_threshold = 1e-6) {
  units.validate();
  if (psi0.grid.dim() != 1)
    throw InvalidArgument("grid_propagate: 1D grids only");
  if (t_final < 0.0 || n_steps < 0)
    throw InvalidArgument("grid_propagate: negative time or steps");
  WaveFunction out = psi0;
  detail::split_step_evolve(out.amplitudes, out.grid, v, t_final, n_steps,
                            units, leak_threshold);
  return out;
}

/// Momentum-kick evolution: split-step segments with phase factors
/// exp(-i dK x) applied at the nearest step boundary of each kick event.
/// Each kick translates the momentum distribution by -dK (in wavenumber).
inline WaveFunction kicked_evolution(const WaveFunction& psi0,
                                     const KickSchedule& schedule,
                                     const Potential& v, double t_final,
                                     int n_steps, const Units& units = {},
                                     double leak_threshold = 1e-6) {
  units.validate();
  if (psi0.grid.dim() != 1)
    throw InvalidArgument("kicked_evolution: 1D grids only");
  if (n_steps < 1)
    throw InvalidArgument("kicked_evolution: n_steps >= 1 required");
  schedule.validate(t_final);

  const double dt = t_final / n_steps;
  std::vector<double> kick_at_node(static_cast<size_t>(n_steps) + 1, 0.0);
  for (std::size_t i = 0; i < schedule.times.size(); ++i) {
    const auto node = std::clamp<long>(std::lround(schedule.times[i] / dt), 1,
                                       n_steps);
    kick_at_node[static_cast<size_t>(node)] += schedule.kicks[i];
  }

  WaveFunction out = psi0;
  const std::size_t n = out.amplitudes.size();
  for (int s = 1; s <= n_steps; ++s) {
    detail::split_step_evolve(out.amplitudes, out.grid, v, dt, 1, units,
                              leak_threshold);
    const double dk = kick_at_node[static_cast<size_t>(s)];
    if (dk != 0.0) {
      for (std::size_t j = 0; j < n; ++j)
        out.amplitudes[j] *=
            std::polar(1.0, -dk * out.grid.coord(static_cast<int>(j)));
    }
  }
  return out;
}

/// Conditional amplitude under a sequence of filter-function measurements:
/// propagation segments alternate with pointwise multiplication by
/// Upsilon(xbar_q - x). The returned state is deliberately unnormalized; its
/// squared norm is the (relative) probability density of the record.
inline WaveFunction filtered_amplitude(const WaveFunction& psi0,
                                       const FilterSpec& filter,
                                       std::span<const double> measurement_times,
                                       const Potential& v, double t_final,
                                       int n_steps, const Units& units = {},
                                       double leak_threshold = 1e-6) {
  units.validate();
  if (psi0.grid.dim() != 1)
    throw InvalidArgument("filtered_amplitude: 1D grids only");
  if (n_steps < 1)
    throw InvalidArgument("filtered_amplitude: n_steps >= 1 required");
  if (filter.kind != FilterKind::None) {
    if (!(filter.width > 0.0))
      throw InvalidArgument("filtered_amplitude: filter width must be > 0");
    if (filter.record.size() != measurement_times.size())
      throw InvalidArgument(
          "filtered_amplitude: record/measurement_times length mismatch");
  }
  for (std::size_t q = 0; q < measurement_times.size(); ++q) {
    const double t = measurement_times[q];
    if (!(t > 0.0) || t > t_final + tol::grid_uniformity)
      throw InvalidArgument("filtered_amplitude: time outside (0, t_final]");
    if (q > 0 && !(t > measurement_times[q - 1]))
      throw InvalidArgument("filtered_amplitude: times must strictly increase");
  }

  WaveFunction out = psi0;
  const std::size_t n = out.amplitudes.size();
  double t_prev = 0.0;
  auto steps_for = [&](double seg) {
    return std::max(1, static_cast<int>(std::lround(n_steps * seg / t_final)));
  };

  for (std::size_t q = 0; q < measurement_times.size(); ++q) {
    const double seg = measurement_times[q] - t_prev;
    if (seg > 0.0)
      detail::split_step_evolve(out.amplitudes, out.grid, v, seg,
                                steps_for(seg), units, leak_threshold);
    if (filter.kind != FilterKind::None) {
      const double xbar = filter.record[q];
      for (std::size_t j = 0; j < n; ++j)
        out.amplitudes[j] *= filter(xbar - out.grid.coord(static_cast<int>(j)));
    }
    t_prev = measurement_times[q];
  }
  if (t_final - t_prev > 0.0)
    detail::split_step_evolve(out.amplitudes, out.grid, v, t_final - t_prev,
                              steps_for(t_final - t_prev), units,
                              leak_threshold);
  return out;
}

namespace detail {

struct LatticeProblem {
  std::vector<double> xs;          // grid coordinates
  std::vector<Complex> pot_phase;  // exp(-i V(x) dt / hbar) per grid point
  std::vector<double> kick_at_node;
  int n_steps;
  double h, dt;
  int i0, f0;  // snapped endpoint indices
};

inline LatticeProblem make_lattice(double x_i, double x_f, double t_final,
                                   int n_steps, const SpatialGrid& grid,
                                   const Potential& v,
                                   const KickSchedule& kicks,
                                   const Units& units) {
  units.validate();
  if (grid.dim() != 1) throw InvalidArgument("lattice: 1D grids only");
  if (n_steps < 1) throw InvalidArgument("lattice: n_steps >= 1 required");
  if (!(t_final > 0.0)) throw InvalidArgument("lattice: t_final > 0 required");
  kicks.validate(t_final);

  LatticeProblem lp;
  lp.n_steps = n_steps;
  lp.dt = t_final / n_steps;
  lp.h = grid.spacing();
  const int n = grid.axis(0).n_points;
  lp.xs.resize(static_cast<size_t>(n));
  lp.pot_phase.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    lp.xs[static_cast<size_t>(j)] = grid.coord(j);
    lp.pot_phase[static_cast<size_t>(j)] =
        std::polar(1.0, -v(grid.coord(j), 0) * lp.dt / units.hbar);
  }
  lp.kick_at_node.assign(static_cast<size_t>(n_steps) + 1, 0.0);
  for (std::size_t i = 0; i < kicks.times.size(); ++i) {
    const auto node = std::clamp<long>(std::lround(kicks.times[i] / lp.dt), 1,
                                       n_steps);
    lp.kick_at_node[static_cast<size_t>(node)] += kicks.kicks[i];
  }
  lp.i0 = grid.index_of(x_i);
  lp.f0 = grid.index_of(x_f);
  return lp;
}

inline void check_enumeration_guard(std::size_t n_points, int n_steps) {
  double paths = 1.0;
  for (int s = 0; s < n_steps; ++s) {
    paths *= static_cast<double>(n_points);
    if (paths > 1e7)
      throw TooLarge("lattice enumeration guard: n_points^n_steps > 1e7");
  }
}

}  // namespace detail

/// Brute-force sum over every lattice path from x_i to x_f (endpoints snapped
/// to the nearest grid node): product of short-time kernels, one measure
/// factor h per intermediate integration variable, and the kick phases
/// exp(-i dK_j x_j). This is the oracle the transfer-step evaluation is
/// checked against.
inline Complex lattice_path_sum(double x_i, double x_f, double t_final,
                                int n_steps, const SpatialGrid& grid,
                                const Potential& v, const KickSchedule& kicks,
                                const Units& units = {}) {
  const auto lp =
      detail::make_lattice(x_i, x_f, t_final, n_steps, grid, v, kicks, units);
  detail::check_enumeration_guard(lp.xs.size(), n_steps);

  const std::size_t n_pts = lp.xs.size();
  const double kin = 0.5 * units.mass / (units.hbar * lp.dt);
  const double kmod = std::sqrt(units.mass / (2.0 * M_PI * units.hbar * lp.dt));

  auto leg = [&](double x_to, std::size_t to_idx, double x_from,
                 int node) -> Complex {
    const double d = x_to - x_from;
    Complex a = std::polar(kmod, kin * d * d - 0.25 * M_PI) *
                lp.pot_phase[to_idx];
    const double dk = lp.kick_at_node[static_cast<size_t>(node)];
    if (dk != 0.0) a *= std::polar(1.0, -dk * x_to);
    return a;
  };

  const double x_start = lp.xs[static_cast<size_t>(lp.i0)];
  const double x_end = lp.xs[static_cast<size_t>(lp.f0)];

  detail::ComplexAccumulator total;
  if (n_steps == 1) {
    total.add(leg(x_end, static_cast<size_t>(lp.f0), x_start, 1));
    return total.value();
  }

  const int interior = n_steps - 1;
  std::vector<std::size_t> idx(static_cast<size_t>(interior), 0);
  std::vector<Complex> prod(static_cast<size_t>(interior));
  const double measure = std::pow(lp.h, interior);

  // Odometer enumeration with incremental products: prod[k] is the amplitude
  // through node k+1.
  int level = 0;
  while (true) {
    for (; level < interior; ++level) {
      const double x_prev =
          (level == 0) ? x_start : lp.xs[idx[static_cast<size_t>(level - 1)]];
      const Complex base = (level == 0) ? Complex(1.0, 0.0)
                                        : prod[static_cast<size_t>(level - 1)];
      prod[static_cast<size_t>(level)] =
          base * leg(lp.xs[idx[static_cast<size_t>(level)]],
                     idx[static_cast<size_t>(level)], x_prev, level + 1);
    }
    const double x_last = lp.xs[idx[static_cast<size_t>(interior - 1)]];
    total.add(prod[static_cast<size_t>(interior - 1)] *
              leg(x_end, static_cast<size_t>(lp.f0), x_last, n_steps) *
              measure);

    // advance odometer
    level = interior - 1;
    while (level >= 0 && ++idx[static_cast<size_t>(level)] == n_pts) {
      idx[static_cast<size_t>(level)] = 0;
      --level;
    }
    if (level < 0) break;
  }
  return total.value();
}

namespace detail {

/// Runs n_steps transfer steps (kinetic-kernel convolution with measure h,
/// then potential and kick phases) on the state in place.
inline void transfer_evolve(std::vector<Complex>& state,
                            const LatticeProblem& lp, const Units& units) {
  const std::size_t n = lp.xs.size();
  const double kin = 0.5 * units.mass / (units.hbar * lp.dt);
  const double kmod = std::sqrt(units.mass / (2.0 * M_PI * units.hbar * lp.dt));

  // Kinetic kernel sampled at all displacement multiples of h.
  std::vector<Complex> kernel(2 * n - 1);
  for (std::size_t j = 0; j < kernel.size(); ++j) {
    const double d = (static_cast<double>(j) - static_cast<double>(n - 1)) * lp.h;
    kernel[j] = std::polar(kmod, kin * d * d - 0.25 * M_PI);
  }

  const bool use_fft = n > 96;
  std::vector<Complex> kfft;
  std::size_t padded = 0;
  if (use_fft) {
    padded = next_pow2(2 * n - 1);
    kfft.assign(padded, Complex(0.0, 0.0));
    std::copy(kernel.begin(), kernel.end(), kfft.begin());
    fft_inplace(kfft, FFTW_FORWARD);
  }

  std::vector<Complex> work;
  for (int s = 1; s <= lp.n_steps; ++s) {
    std::vector<Complex> next(n);
    if (use_fft) {
      work.assign(padded, Complex(0.0, 0.0));
      std::copy(state.begin(), state.end(), work.begin());
      fft_inplace(work, FFTW_FORWARD);
      for (std::size_t j = 0; j < padded; ++j) work[j] *= kfft[j];
      fft_inplace(work, FFTW_BACKWARD);
      // linear convolution: output index a corresponds to work[a + n - 1]
      for (std::size_t a = 0; a < n; ++a) next[a] = work[a + n - 1] * lp.h;
    } else {
      for (std::size_t a = 0; a < n; ++a) {
        ComplexAccumulator acc;
        for (std::size_t b = 0; b < n; ++b)
          acc.add(kernel[a + (n - 1) - b] * state[b]);
        next[a] = acc.value() * lp.h;
      }
    }
    const double dk = lp.kick_at_node[static_cast<size_t>(s)];
    for (std::size_t a = 0; a < n; ++a) {
      next[a] *= lp.pot_phase[a];
      if (dk != 0.0) next[a] *= std::polar(1.0, -dk * lp.xs[a]);
    }
    state = std::move(next);
  }
}

}  // namespace detail

/// Transfer-step evaluation of the conditional amplitude
/// <x_f| kicked evolution |x_i> on an explicit lattice: identical
/// discretization to lattice_path_sum (same kernels, same measure, same kick
/// phases), evaluated by repeated convolution instead of enumeration.
/// Endpoints are snapped to the nearest grid node; the discretization bias of
/// the delta-like endpoint states is measured against the analytic free
/// propagator in the tests.
inline Complex z_functional(double x_i, double x_f, double t_final,
                            const KickSchedule& kicks, const Potential& v,
                            int n_steps, const SpatialGrid& grid,
                            const Units& units = {}) {
  const auto lp =
      detail::make_lattice(x_i, x_f, t_final, n_steps, grid, v, kicks, units);
  std::vector<Complex> state(lp.xs.size(), Complex(0.0, 0.0));
  // The 1/h of the delta-like indicator cancels the first step's measure
  // factor, leaving exactly h^(n-1) over the interior integrals.
  state[static_cast<size_t>(lp.i0)] = Complex(1.0 / lp.h, 0.0);
  detail::transfer_evolve(state, lp, units);
  return state[static_cast<size_t>(lp.f0)];
}

/// Grid propagation by short-time-kernel convolution (the open-boundary
/// counterpart of the split-step scheme; same continuum limit, different
/// discretization). The sampled kinetic chirp must stay below the grid
/// Nyquist rate across the box, h <= 2 pi hbar dt / (m * box width);
/// refining the grid therefore requires proportionally fewer, longer steps.
inline WaveFunction kernel_propagate(const WaveFunction& psi0,
                                     const Potential& v, double t_final,
                                     int n_steps, const Units& units = {}) {
  if (psi0.grid.dim() != 1)
    throw InvalidArgument("kernel_propagate: 1D grids only");
  const auto lp = detail::make_lattice(psi0.grid.axis(0).min,
                                       psi0.grid.axis(0).max, t_final, n_steps,
                                       psi0.grid, v, {}, units);
  WaveFunction out = psi0;
  detail::transfer_evolve(out.amplitudes, lp, units);
  return out;
}

/// Semiclassical (stationary-phase) conditional amplitude around the
/// unperturbed classical trajectory:
///   VanVleck * exp(i S_cl / hbar) * exp(-i integral dK(tau) x_cl(tau) dtau).
/// The kick schedule is treated as samples of a kick density dK(tau) and the
/// integral is taken by the trapezoid rule over the schedule nodes (a
/// single-event schedule therefore integrates to zero). This differs from the
/// discrete per-event phases of kicked_evolution / z_functional.
inline Complex semiclassical_z(double x_i, double x_f, double t_final,
                               const KickSchedule& kicks, const Potential& v,
                               const Units& units = {}, int n_steps = 4096,
                               double initial_guess = std::numeric_limits<double>::quiet_NaN()) {
  units.validate();
  kicks.validate(t_final);
  if (std::isnan(initial_guess))
    initial_guess = units.mass * (x_f - x_i) / t_final;

  const Trajectory traj = classical::solve_bvp(v, x_i, x_f, t_final, n_steps,
                                               initial_guess, units);
  const double s_cl = classical::action(traj, v, units).value;
  const auto pref = classical::van_vleck_prefactor(v, traj, units);

  double kick_integral = 0.0;
  for (std::size_t i = 0; i + 1 < kicks.times.size(); ++i) {
    const double g0 = kicks.kicks[i] * traj.position_at(kicks.times[i], units.mass).x;
    const double g1 = kicks.kicks[i + 1] *
                      traj.position_at(kicks.times[i + 1], units.mass).x;
    kick_integral += 0.5 * (g0 + g1) * (kicks.times[i + 1] - kicks.times[i]);
  }
  return pref.value * std::polar(1.0, s_cl / units.hbar - kick_integral);
}

/// Dominance of the near-minimal action window: |sum over paths with
/// S - S_min <= pi*hbar| / |sum over all paths|. On a lattice the ratio can
/// exceed one: paths outside the window interfere destructively against the
/// window core, so shrinking hbar at fixed lattice grows the ratio away from
/// one — the diagnostic of classical dominance. A single enumerated path
/// gives exactly one.
inline double stationary_dominance(double x_i, double x_f, double t_final,
                                   int n_steps, const SpatialGrid& grid,
                                   const Potential& v,
                                   const Units& units = {}) {
  const KickSchedule no_kicks;
  const auto lp = detail::make_lattice(x_i, x_f, t_final, n_steps, grid, v,
                                       no_kicks, units);
  detail::check_enumeration_guard(lp.xs.size(), n_steps);

  const std::size_t n_pts = lp.xs.size();
  const double x_start = lp.xs[static_cast<size_t>(lp.i0)];
  const double x_end = lp.xs[static_cast<size_t>(lp.f0)];

  // Discrete action consistent with the kernel phases (velocity term plus
  // arrival-point potential).
  auto leg_action = [&](double x_to, double x_from) {
    const double vel = (x_to - x_from) / lp.dt;
    return (0.5 * units.mass * vel * vel - v(x_to, 0)) * lp.dt;
  };

  const int interior = n_steps - 1;
  std::vector<std::size_t> idx;
  std::vector<double> partial;

  auto enumerate = [&](auto&& visit) {
    if (interior == 0) {
      visit(leg_action(x_end, x_start));
      return;
    }
    idx.assign(static_cast<size_t>(interior), 0);
    partial.assign(static_cast<size_t>(interior), 0.0);
    int level = 0;
    while (true) {
      for (; level < interior; ++level) {
        const double x_prev =
            (level == 0) ? x_start : lp.xs[idx[static_cast<size_t>(level - 1)]];
        const double base =
            (level == 0) ? 0.0 : partial[static_cast<size_t>(level - 1)];
        partial[static_cast<size_t>(level)] =
            base + leg_action(lp.xs[idx[static_cast<size_t>(level)]], x_prev);
      }
      visit(partial[static_cast<size_t>(interior - 1)] +
            leg_action(x_end, lp.xs[idx[static_cast<size_t>(interior - 1)]]));
      level = interior - 1;
      while (level >= 0 && ++idx[static_cast<size_t>(level)] == n_pts) {
        idx[static_cast<size_t>(level)] = 0;
        --level;
      }
      if (level < 0) break;
    }
  };

  double s_min = std::numeric_limits<double>::infinity();
  enumerate([&](double s) { s_min = std::min(s_min, s); });

  detail::ComplexAccumulator window, all;
  const double cut = M_PI * units.hbar;
  enumerate([&](double s) {
    const Complex a = std::polar(1.0, s / units.hbar);
    all.add(a);
    if (s - s_min <= cut) window.add(a);
  });

  const double denom = std::abs(all.value());
  const double numer = std::abs(window.value());
  if (!(denom > 0.0) || !std::isfinite(numer / denom))
    throw NonFinite("stationary_dominance: degenerate total amplitude");
  return numer / denom;
}

}  // namespace pathmeas::pathint
