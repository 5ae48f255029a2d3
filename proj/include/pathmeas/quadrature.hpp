#pragma once

// Reference quadratures. The spherical integral here evaluates the per-probe
// angular integrand by brute numerical integration (Gauss-Legendre in the
// polar angle x uniform rule in the azimuth); it is deliberately independent
// of the closed-form sinc expression it is used to check.

#include <cmath>
#include <complex>
#include <vector>

#include "pathmeas/core.hpp"

namespace pathmeas::quadrature {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule by Newton iteration on the Legendre recurrence.
inline GaussLegendre gauss_legendre(int n) {
  if (n < 2) throw InvalidArgument("gauss_legendre: n >= 2 required");
  GaussLegendre rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess for the i-th root.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<size_t>(i)] = x;
    rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Numerical evaluation of the probe angular integral: Gauss-Legendre in
/// theta, uniform (trapezoid on the periodic interval) in phi, of
///   sin(theta) exp(i (2 pi / lambda) khat(theta,phi) . dr)
/// times the constant factor i exp(-i 2 pi dr_z / lambda) that rides along
/// outside the angular dependence.
inline Complex spherical_kick_integral(const Vec3& dr, double lambda_p,
                                       int n_theta = 64, int n_phi = 64) {
  if (!(lambda_p > 0.0))
    throw InvalidArgument("spherical_kick_integral: lambda_p > 0 required");
  const double k = 2.0 * M_PI / lambda_p;
  const GaussLegendre rule = gauss_legendre(n_theta);

  Complex total(0.0, 0.0);
  const double dphi = 2.0 * M_PI / n_phi;
  for (int it = 0; it < n_theta; ++it) {
    // Map ct = cos(theta) from the [-1,1] Gauss nodes; sin(theta) dtheta
    // becomes the plain node weight.
    const double ct = rule.nodes[static_cast<size_t>(it)];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    Complex phi_sum(0.0, 0.0);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = dphi * ip;
      const double phase =
          k * (st * std::cos(phi) * dr.x + st * std::sin(phi) * dr.y +
               ct * dr.z);
      phi_sum += std::polar(1.0, phase);
    }
    total += rule.weights[static_cast<size_t>(it)] * phi_sum * dphi;
  }
  return total * Complex(0.0, 1.0) * std::polar(1.0, -k * dr.z);
}

}  // namespace pathmeas::quadrature
