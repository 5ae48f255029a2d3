#pragma once

// N-slit interference with which-path detectors: screen amplitudes from
// semiclassical free propagation, conditional patterns for complementary
// detector outcomes, outcome-averaged patterns, and fringe visibility.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "pathmeas/core.hpp"

namespace pathmeas::nslit {

struct SlitConfig {
  int n_slits = 0;
  std::vector<double> positions;
  double slit_width = 0.0;
  double screen_distance = 0.0;
  double de_broglie = 0.0;

  void validate() const {
    if (n_slits < 1) throw InvalidArgument("SlitConfig: n_slits >= 1");
    if (static_cast<int>(positions.size()) != n_slits)
      throw InvalidArgument("SlitConfig: one position per slit required");
    if (!(slit_width > 0.0) || !(screen_distance > 0.0) || !(de_broglie > 0.0))
      throw InvalidArgument("SlitConfig: width, distance, wavelength > 0");
    for (std::size_t i = 0; i < positions.size(); ++i)
      for (std::size_t j = i + 1; j < positions.size(); ++j)
        if (positions[i] == positions[j])
          throw InvalidArgument("SlitConfig: slit positions must be distinct");
  }

  /// Flight time to the screen at the nominal speed p/m = 2 pi hbar/(m lambda).
  double flight_time(const Units& units) const {
    return screen_distance * units.mass * de_broglie /
           (2.0 * M_PI * units.hbar);
  }
};

enum class AmplitudeMode { Semiclassical, EqualWeight };

/// Screen amplitudes phi_k for each slit: the free classical action
/// m (x_s - x_k)^2 / (2 T) sets the phase; Semiclassical mode multiplies the
/// constant path-density prefactor sqrt(d2 S / dx_s dx_k), EqualWeight
/// replaces it by 1.
inline std::vector<Complex> slit_amplitudes(const SlitConfig& config,
                                            double x_s,
                                            const Units& units = {},
                                            AmplitudeMode mode =
                                                AmplitudeMode::EqualWeight) {
  config.validate();
  units.validate();
  const double t = config.flight_time(units);
  Complex pref(1.0, 0.0);
  if (mode == AmplitudeMode::Semiclassical)
    pref = std::sqrt(Complex(-units.mass / t, 0.0));
  std::vector<Complex> amps(static_cast<size_t>(config.n_slits));
  for (int k = 0; k < config.n_slits; ++k) {
    const double d = x_s - config.positions[static_cast<size_t>(k)];
    const double s_cl = 0.5 * units.mass * d * d / t;
    amps[static_cast<size_t>(k)] = pref * std::polar(1.0, s_cl / units.hbar);
  }
  return amps;
}

/// Interference intensity with no measurement:
/// (1/N)(sum |phi_k|^2 + 2 sum_{i<j} Re(phi_i* phi_j)) = |sum phi_k|^2 / N.
inline double intensity_unmeasured(std::span<const Complex> amplitudes) {
  if (amplitudes.empty())
    throw InvalidArgument("intensity_unmeasured: empty amplitude set");
  Complex sum(0.0, 0.0);
  for (const Complex& a : amplitudes) sum += a;
  return std::norm(sum) / static_cast<double>(amplitudes.size());
}

/// Which-path detector states as rows of an n x M coefficient matrix over a
/// complementary orthonormal basis. Rows are normalized on construction;
/// relative phases between rows are preserved (they carry the complementary
/// phase information).
class DetectorSet {
 public:
  DetectorSet(std::vector<std::vector<Complex>> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw InvalidArgument("DetectorSet: no detectors");
    const std::size_t m = rows_.front().size();
    if (m == 0) throw InvalidArgument("DetectorSet: empty basis");
    for (auto& row : rows_) {
      if (row.size() != m)
        throw InvalidArgument("DetectorSet: ragged coefficient matrix");
      double n2 = 0.0;
      for (const Complex& c : row) n2 += std::norm(c);
      if (n2 < tol::zero_norm)
        throw ZeroNorm("DetectorSet: zero-norm detector state");
      const double inv = 1.0 / std::sqrt(n2);
      for (Complex& c : row) c *= inv;
    }
  }

  /// Mutually orthogonal detectors: perfect which-path information.
  static DetectorSet orthonormal(int n) {
    std::vector<std::vector<Complex>> rows(
        static_cast<size_t>(n),
        std::vector<Complex>(static_cast<size_t>(n), Complex(0, 0)));
    for (int k = 0; k < n; ++k)
      rows[static_cast<size_t>(k)][static_cast<size_t>(k)] = Complex(1, 0);
    return DetectorSet(std::move(rows));
  }

  /// All detectors in the same state: no which-path information.
  static DetectorSet identical(int n, int basis_size = 0) {
    const int m = basis_size > 0 ? basis_size : n;
    std::vector<std::vector<Complex>> rows(
        static_cast<size_t>(n),
        std::vector<Complex>(static_cast<size_t>(m), Complex(0, 0)));
    for (auto& row : rows) row[0] = Complex(1, 0);
    return DetectorSet(std::move(rows));
  }

  /// Two detectors with real overlap c: rows (1, 0) and (c, sqrt(1 - c^2)).
  static DetectorSet overlap_pair(double c) {
    if (c < 0.0 || c > 1.0)
      throw InvalidArgument("DetectorSet: overlap must lie in [0, 1]");
    std::vector<std::vector<Complex>> rows{
        {Complex(1, 0), Complex(0, 0)},
        {Complex(c, 0), Complex(std::sqrt(1.0 - c * c), 0)}};
    return DetectorSet(std::move(rows));
  }

  std::size_t n_detectors() const { return rows_.size(); }
  std::size_t basis_size() const { return rows_.front().size(); }
  const Complex& coeff(std::size_t detector, std::size_t basis) const {
    return rows_[detector][basis];
  }

 private:
  std::vector<std::vector<Complex>> rows_;
};

/// Gram matrix G_jk = <D_j|D_k>; Hermitian with unit diagonal.
inline std::vector<std::vector<Complex>> gram_matrix(const DetectorSet& d) {
  const std::size_t n = d.n_detectors();
  const std::size_t m = d.basis_size();
  std::vector<std::vector<Complex>> g(n, std::vector<Complex>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      Complex s(0, 0);
      for (std::size_t b = 0; b < m; ++b)
        s += std::conj(d.coeff(j, b)) * d.coeff(k, b);
      g[j][k] = s;
    }
  return g;
}

/// Screen intensity conditioned on the detector being found in complementary
/// basis state m: |(1/sqrt N) sum_k c_km phi_k|^2. The fringes persist but
/// shift with the detector phases.
inline double conditional_pattern(std::span<const Complex> amplitudes,
                                  const DetectorSet& detectors,
                                  std::size_t outcome) {
  const std::size_t n = detectors.n_detectors();
  if (amplitudes.size() != n)
    throw InvalidArgument("conditional_pattern: amplitude/detector mismatch");
  if (outcome >= detectors.basis_size())
    throw BadOutcome("conditional_pattern: outcome " + std::to_string(outcome) +
                     " out of range");
  Complex s(0, 0);
  for (std::size_t k = 0; k < n; ++k)
    s += detectors.coeff(k, outcome) * amplitudes[k];
  return std::norm(s) / static_cast<double>(n);
}

/// Screen intensity averaged over all complementary measurement outcomes:
/// sum_m |(1/sqrt N) sum_k c_km phi_k|^2 = (1/N) sum_jk G_jk phi_j* phi_k.
/// Orthogonal detectors kill every cross term (strong-measurement limit);
/// identical detectors restore the full interference pattern.
inline double averaged_pattern(std::span<const Complex> amplitudes,
                               const DetectorSet& detectors) {
  const std::size_t n = detectors.n_detectors();
  if (amplitudes.size() != n)
    throw InvalidArgument("averaged_pattern: amplitude/detector mismatch");
  double total = 0.0;
  for (std::size_t m = 0; m < detectors.basis_size(); ++m)
    total += conditional_pattern(amplitudes, detectors, m);
  return total;
}

/// Fringe visibility (P_max - P_min) / (P_max + P_min) of a sampled pattern;
/// the sample must cover at least one full fringe period.
inline double visibility(std::span<const double> pattern) {
  if (pattern.empty()) throw InvalidArgument("visibility: empty pattern");
  const auto [lo, hi] = std::minmax_element(pattern.begin(), pattern.end());
  const double denom = *hi + *lo;
  if (denom < tol::flat_pattern)
    throw FlatPattern("visibility: pattern is identically zero");
  return (*hi - *lo) / denom;
}

}  // namespace pathmeas::nslit
