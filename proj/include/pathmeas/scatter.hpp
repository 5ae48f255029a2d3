#pragma once

// Probe-scattering measurement model: elastic S-matrix, the closed-form
// angular kick integral, the zeta-series probe weight and its continuum
// limit, and the joint system/record amplitude built from them.
//
// Conventions shared by every weight function here:
//  - probes and the classical path live on the same uniform time grid;
//  - the per-step probe wavelength is lambda(dt) = alpha / sqrt(dt);
//  - per-step sums carry trapezoid coefficients (half weight at the first and
//    last probe), which makes the m = 1 series term equal to the continuum
//    trapezoid integral identically rather than to O(dt^2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pathmeas/classical.hpp"
#include "pathmeas/core.hpp"

namespace pathmeas::scatter {

/// Plane-wave probe: wavelength and incidence direction (defaults to +z).
struct ProbeSpec {
  double wavelength = 1.0;
  Vec3 direction{0.0, 0.0, 1.0};

  void validate() const {
    if (!(wavelength > 0.0))
      throw InvalidArgument("ProbeSpec: wavelength must be positive");
    if (std::abs(direction.norm() - 1.0) > tol::direction_norm)
      throw InvalidArgument("ProbeSpec: direction must be unit length");
  }
};

/// One probe readout per time node; alpha is the continuum resolution
/// parameter lambda sqrt(dt).
struct ProbeRecord {
  std::vector<double> times;
  std::vector<Vec3> readouts;
  double alpha = 0.0;

  std::size_t size() const { return times.size(); }

  double dt() const {
    if (times.size() < 2)
      throw InvalidArgument("ProbeRecord: need >= 2 samples");
    return times[1] - times[0];
  }

  void validate() const {
    if (!(alpha > 0.0)) throw InvalidArgument("ProbeRecord: alpha must be > 0");
    if (readouts.size() != times.size())
      throw InvalidArgument("ProbeRecord: times/readouts length mismatch");
    if (times.size() < 2)
      throw InvalidArgument("ProbeRecord: need >= 2 samples");
    const double step = times[1] - times[0];
    if (!(step > 0.0))
      throw InvalidArgument("ProbeRecord: times must strictly increase");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (std::abs(times[i] - times[i - 1] - step) >
          tol::grid_uniformity * std::max(1.0, step))
        throw InvalidArgument("ProbeRecord: non-uniform time grid");
  }
};

/// Eq.-20-style decomposition: value = prefactor * exp(i action_phase)
/// * exp(log_weight), with log_weight <= 0.
struct JointAmplitude {
  Complex prefactor;
  double action_phase = 0.0;  // S_cl / hbar
  double log_weight = 0.0;    // <= 0
  Complex value;
};

namespace detail {

inline void require_conformal(const ProbeRecord& record,
                              const Trajectory& r_cl) {
  record.validate();
  r_cl.validate();
  if (record.size() != r_cl.size())
    throw InvalidArgument("record and classical path differ in length");
  const double dt_r = record.dt();
  const double dt_c = r_cl.dt();
  if (std::abs(dt_r - dt_c) > 1e-9 * std::max(1.0, std::abs(dt_c)))
    throw InvalidArgument("record and classical path differ in time step");
}

/// Trapezoid coefficient for node j of n+1 nodes with step dt.
inline double trapezoid_weight(std::size_t j, std::size_t n_nodes, double dt) {
  return (j == 0 || j + 1 == n_nodes) ? 0.5 * dt : dt;
}

inline double sinc(double y) {
  if (std::abs(y) < 1e-8) return 1.0 - y * y / 6.0;
  return std::sin(y) / y;
}

}  // namespace detail

/// Elastic S-matrix element with uniform angular distribution: nonzero only
/// on the elastic shell (moduli equal within 1e-9 relative), where the
/// delta/(K^2 sin theta) factor against f = sin(theta)/sqrt(4 pi) leaves the
/// direction-independent value 1/(sqrt(4 pi) |K_f|^2).
inline Complex s_matrix_element(const Vec3& k_f, const Vec3& k_i) {
  if (!std::isfinite(k_f.norm2()) || !std::isfinite(k_i.norm2()))
    throw InvalidArgument("s_matrix_element: non-finite momentum");
  const double mf = k_f.norm();
  const double mi = k_i.norm();
  if (std::abs(mf - mi) > tol::elastic_modulus * std::max(mi, 1e-300))
    return {0.0, 0.0};
  if (mf <= 0.0)
    throw InvalidArgument("s_matrix_element: zero momentum on elastic shell");
  return {1.0 / (std::sqrt(4.0 * M_PI) * mf * mf), 0.0};
}

/// Closed form of the per-probe angular integral:
///   I = 4 pi i exp(-i 2 pi dr_z / lambda_p) sinc(2 pi |dr| / lambda_p),
/// the pin-hole diffraction factor picked up by one probe scattering off a
/// system displaced by dr from the record readout.
inline Complex angular_kick_integral(const Vec3& dr, double lambda_p) {
  if (!(lambda_p > 0.0))
    throw InvalidArgument("angular_kick_integral: lambda_p must be > 0");
  const double k = 2.0 * M_PI / lambda_p;
  const Complex constant =
      Complex(0.0, 4.0 * M_PI) * std::polar(1.0, -k * dr.z);
  return constant * detail::sinc(k * dr.norm());
}

/// Per-step constant 4 pi i exp(-i 2 pi dr_z / lambda) that the continuum
/// construction drops into the overall normalization; exposed so the dropped
/// phase can be audited against the full product.
inline Complex dropped_step_normalization(double dr_z, double lambda) {
  if (!(lambda > 0.0))
    throw InvalidArgument("dropped_step_normalization: lambda must be > 0");
  return Complex(0.0, 4.0 * M_PI) *
         std::polar(1.0, -2.0 * M_PI * dr_z / lambda);
}

/// zeta(2m) by direct series plus an Euler-Maclaurin tail whose truncation
/// error is below 1e-14 by the integral tail bound.
inline double zeta_even(int m) {
  if (m < 1) throw InvalidArgument("zeta_even: m >= 1 required");
  const double s = 2.0 * static_cast<double>(m);
  const int cutoff = 1000;
  double sum = 0.0;
  int k = 1;
  for (; k < cutoff; ++k) {
    const double term = std::pow(static_cast<double>(k), -s);
    sum += term;
    if (term < 1e-18 * sum) return sum;  // series already converged
  }
  // Tail from k = cutoff: integral term plus Euler-Maclaurin corrections.
  const double kk = static_cast<double>(cutoff);
  const double fk = std::pow(kk, -s);
  sum += fk * kk / (s - 1.0)     // integral_k^inf x^-s dx
         + 0.5 * fk              // f(k)/2
         + s * fk / kk / 12.0    // -f'(k)/12
         - s * (s + 1.0) * (s + 2.0) * fk / (kk * kk * kk) / 720.0;
  return sum;
}

/// Probe log-weight by the zeta series with per-step wavelength
/// lambda(dt) = alpha/sqrt(dt):
///   -sum_j w_j/dt sum_{m=1..m_max} 4^m zeta(2m) (|dr_j|^2 / lambda^2)^m,
/// w_j the trapezoid coefficients. The m = 1 partial sum equals
/// continuum_weight identically; terms with m >= 2 vanish as O(dt) overall.
/// Requires the convergence condition 4 |dr_j|^2 / lambda^2 < 1 at every j.
inline double log_product_weight(const ProbeRecord& record,
                                 const Trajectory& r_cl, int m_max) {
  detail::require_conformal(record, r_cl);
  if (m_max < 1) throw InvalidArgument("log_product_weight: m_max >= 1");
  const double dt = record.dt();
  const double lambda2 = record.alpha * record.alpha / dt;

  std::vector<double> zeta(static_cast<size_t>(m_max) + 1, 0.0);
  for (int m = 1; m <= m_max; ++m) zeta[static_cast<size_t>(m)] = zeta_even(m);

  const std::size_t n_nodes = record.size();
  double worst_q = 0.0;
  std::size_t worst_j = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const Vec3 dr = record.readouts[j] - r_cl.positions[j];
    const double q = 4.0 * dr.norm2() / lambda2;
    if (q > worst_q) {
      worst_q = q;
      worst_j = j;
    }
    double qm = 1.0;
    double node = 0.0;
    for (int m = 1; m <= m_max; ++m) {
      qm *= q;
      node += zeta[static_cast<size_t>(m)] * qm;
    }
    total += detail::trapezoid_weight(j, n_nodes, dt) / dt * node;
  }
  if (worst_q >= 1.0)
    throw SeriesDiverges("log_product_weight: 4|dr|^2/lambda^2 = " +
                         std::to_string(worst_q) + " >= 1 at node " +
                         std::to_string(worst_j));
  return -total;
}

/// Continuum-limit log-weight of the record around the classical path:
///   -(2 pi^2 / 3 alpha^2) * trapezoid(|r_p - r_cl|^2, tau).
inline double continuum_weight(const ProbeRecord& record,
                               const Trajectory& r_cl, double alpha) {
  detail::require_conformal(record, r_cl);
  if (!(alpha > 0.0)) throw InvalidArgument("continuum_weight: alpha > 0");
  const double dt = record.dt();
  const std::size_t n_nodes = record.size();
  const double scale = 2.0 * M_PI * M_PI / (3.0 * alpha * alpha);
  double total = 0.0;
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const Vec3 dr = record.readouts[j] - r_cl.positions[j];
    total += detail::trapezoid_weight(j, n_nodes, dt) * dr.norm2();
  }
  return -scale * total;
}

/// Per-probe log factors -(2 pi^2 / 3 alpha^2) w_j |dr_j|^2. Each factor
/// depends only on its own probe's deviation, every factor is <= 0, and the
/// factors sum to continuum_weight — the redundancy property: any fragment of
/// probes carries independent information about the classical path.
inline std::vector<double> probe_weight_factorization(const ProbeRecord& record,
                                                      const Trajectory& r_cl,
                                                      double alpha) {
  detail::require_conformal(record, r_cl);
  if (!(alpha > 0.0))
    throw InvalidArgument("probe_weight_factorization: alpha > 0");
  const double dt = record.dt();
  const std::size_t n_nodes = record.size();
  const double scale = 2.0 * M_PI * M_PI / (3.0 * alpha * alpha);
  std::vector<double> factors(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const Vec3 dr = record.readouts[j] - r_cl.positions[j];
    factors[j] = -scale * detail::trapezoid_weight(j, n_nodes, dt) * dr.norm2();
  }
  return factors;
}

/// Joint amplitude for the propagator and the measurement record: Van Vleck
/// prefactor, classical action phase, and the Gaussian record weight around
/// the classical path solving the 1D boundary problem x_i -> x_f on the
/// record's time grid (embedded as (x, 0, 0)).
inline JointAmplitude joint_amplitude(const ProbeRecord& record, double x_i,
                                      double x_f, double t_final,
                                      const Potential& v, double alpha,
                                      const Units& units = {}) {
  record.validate();
  units.validate();
  if (!(t_final > 0.0)) throw InvalidArgument("joint_amplitude: t_final > 0");
  if (std::abs(record.times.front()) > tol::grid_uniformity ||
      std::abs(record.times.back() - t_final) >
          1e-9 * std::max(1.0, t_final))
    throw InvalidArgument("joint_amplitude: record must span [0, t_final]");

  const int n_steps = static_cast<int>(record.size()) - 1;
  const double guess = units.mass * (x_f - x_i) / t_final;
  const Trajectory r_cl =
      classical::solve_bvp(v, x_i, x_f, t_final, n_steps, guess, units);

  JointAmplitude ja;
  ja.prefactor = classical::van_vleck_prefactor(v, r_cl, units).value;
  ja.action_phase = classical::action(r_cl, v, units).value / units.hbar;
  ja.log_weight = continuum_weight(record, r_cl, alpha);
  ja.value = ja.prefactor * std::polar(std::exp(ja.log_weight), ja.action_phase);
  return ja;
}

/// Record sitting exactly on a trajectory (handy for Eq.-20 limits).
inline ProbeRecord record_on_path(const Trajectory& r_cl, double alpha) {
  ProbeRecord rec;
  rec.times = r_cl.times;
  rec.readouts = r_cl.positions;
  rec.alpha = alpha;
  rec.validate();
  return rec;
}

}  // namespace pathmeas::scatter
