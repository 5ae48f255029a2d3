#include "catch_amalgamated.hpp"

#include <cmath>
#include <complex>

#include "pathmeas/classical.hpp"

using namespace pathmeas;
namespace cl = pathmeas::classical;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const Units natural{};
}

TEST_CASE("solve_ivp examples") {
  SECTION("free particle follows a straight line") {
    const auto traj = cl::solve_ivp(Potential::free(), 0.0, 1.0, 2.0, 100);
    CHECK_THAT(traj.x(100), WithinAbs(2.0, 1e-12));
  }
  SECTION("harmonic oscillator half period") {
    const auto traj =
        cl::solve_ivp(Potential::harmonic(1.0), 1.0, 0.0, M_PI, 2000);
    CHECK_THAT(traj.x(2000), WithinAbs(-1.0, 1e-6));
  }
  SECTION("quartic energy conservation over one period") {
    const auto pot = Potential::quartic(0.0, 0.25);  // V = x^4/4
    const int n = 4000;
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, 7.5, n);
    const double e0 = 0.25;
    for (int i = 0; i <= n; i += 50) {
      const double e = 0.5 * traj.p(static_cast<size_t>(i)) *
                           traj.p(static_cast<size_t>(i)) +
                       pot(traj.x(static_cast<size_t>(i)), 0);
      CHECK_THAT(e, WithinAbs(e0, 1e-8));
    }
  }
  SECTION("blow-up reports NonFinite") {
    const auto pot = Potential::quartic(0.0, -1.0);  // inverted, escapes
    CHECK_THROWS_AS(cl::solve_ivp(pot, 1.0, 1.0, 10.0, 100), NonFinite);
  }
}

TEST_CASE("solve_bvp examples") {
  SECTION("free particle straight line recovers p0 = 3") {
    const auto traj = cl::solve_bvp(Potential::free(), 0.0, 3.0, 1.0, 200, 1.0);
    CHECK_THAT(traj.p(0), WithinAbs(3.0, 1e-8));
    CHECK_THAT(traj.x(200), WithinAbs(3.0, 1e-8));
  }
  SECTION("harmonic quarter period matches sin") {
    const auto traj = cl::solve_bvp(Potential::harmonic(1.0), 0.0, 1.0,
                                    M_PI / 2.0, 1000, 0.5);
    for (int i = 0; i <= 1000; i += 100)
      CHECK_THAT(traj.x(static_cast<size_t>(i)),
                 WithinAbs(std::sin(traj.times[static_cast<size_t>(i)]), 1e-6));
  }
  SECTION("focal time has no solution") {
    CHECK_THROWS_AS(
        cl::solve_bvp(Potential::harmonic(1.0), 0.0, 1.0, M_PI, 400, 1.0),
        NoConvergence);
  }
}

TEST_CASE("BVP consistency: relaunched IVP reproduces the endpoint") {
  const auto pot = Potential::quartic(0.3, 0.2);
  const auto traj = cl::solve_bvp(pot, -0.4, 0.9, 1.3, 800, 1.0);
  const auto relaunch = cl::solve_ivp(pot, -0.4, traj.p(0), 1.3, 800);
  CHECK_THAT(relaunch.x(800), WithinAbs(0.9, 1e-6));
}

TEST_CASE("action examples") {
  SECTION("free particle closed form m dx^2 / 2t") {
    const auto traj = cl::solve_bvp(Potential::free(), 0.0, 2.0, 1.0, 500, 2.0);
    CHECK_THAT(cl::action(traj, Potential::free()).value, WithinAbs(2.0, 1e-6));
  }
  SECTION("zero displacement, zero potential") {
    const auto traj = cl::solve_ivp(Potential::free(), 0.5, 0.0, 1.0, 100);
    CHECK_THAT(cl::action(traj, Potential::free()).value, WithinAbs(0.0, 1e-14));
  }
  SECTION("identical inputs reproduce the value bit for bit") {
    const auto traj = cl::solve_bvp(Potential::harmonic(1.0), 0.1, 0.9, 1.1,
                                    700, 0.8);
    CHECK(cl::action(traj, Potential::harmonic(1.0)).value ==
          cl::action(traj, Potential::harmonic(1.0)).value);
  }
  SECTION("harmonic BVP path matches the textbook closed form") {
    const double xi = 0.2, xf = 1.1, t = 1.4, w = 1.0;
    const auto pot = Potential::harmonic(w);
    const auto traj = cl::solve_bvp(pot, xi, xf, t, 4000, 0.8);
    const double ref = w / (2.0 * std::sin(w * t)) *
                       ((xi * xi + xf * xf) * std::cos(w * t) - 2.0 * xi * xf);
    CHECK_THAT(cl::action(traj, pot).value, WithinAbs(ref, 1e-5));
  }
}

TEST_CASE("action stationarity along the BVP path") {
  // Perturb by eps * eta(tau) with eta vanishing at both ends; the measured
  // linear coefficient of dS vs eps must be negligible.
  const auto pot = Potential::harmonic(1.0);
  const double t = 1.0;
  const int n = 4000;
  const auto traj = cl::solve_bvp(pot, 0.0, 1.0, t, n, 1.0);
  const double s0 = cl::action(traj, pot).value;

  auto perturbed_action = [&](double eps) {
    Trajectory p = traj;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double tau = p.times[j];
      p.positions[j].x += eps * std::sin(M_PI * tau / t);
    }
    return cl::action(p, pot).value;
  };
  const double e1 = 1e-3, e2 = 1e-4;
  const double d1 = perturbed_action(e1) - s0;
  const double d2 = perturbed_action(e2) - s0;
  // Fit dS = a eps + b eps^2 through the two samples and extract a.
  const double a = (d1 * e2 * e2 - d2 * e1 * e1) / (e1 * e2 * e2 - e2 * e1 * e1);
  CHECK(std::abs(a) < 1e-6 * std::abs(s0));
}

TEST_CASE("van_vleck_prefactor examples") {
  SECTION("free particle: f(t) = t") {
    const double t = 2.0;
    const auto traj = cl::solve_ivp(Potential::free(), 0.0, 0.5, t, 400);
    const auto pref = cl::van_vleck_prefactor(Potential::free(), traj);
    CHECK_THAT(pref.gy_solution.back(), WithinAbs(t, 1e-9));
    const Complex ref = std::polar(std::sqrt(1.0 / (2.0 * M_PI * t)),
                                   -M_PI / 4.0);
    CHECK_THAT(std::abs(pref.value - ref), WithinAbs(0.0, 1e-9));
  }
  SECTION("harmonic: f(t) = sin(w t) / w") {
    const double w = 2.0, t = 0.6;
    const auto pot = Potential::harmonic(w);
    const auto traj = cl::solve_ivp(pot, 0.3, 0.0, t, 2000);
    const auto pref = cl::van_vleck_prefactor(pot, traj);
    CHECK_THAT(pref.gy_solution.back(), WithinAbs(std::sin(w * t) / w, 1e-8));
    CHECK_THAT(std::abs(pref.value),
               WithinAbs(std::sqrt(w / (2.0 * M_PI * std::sin(w * t))), 1e-7));
  }
  SECTION("focal point at t = pi/w") {
    const auto pot = Potential::harmonic(1.0);
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, M_PI, 4000);
    CHECK_THROWS_AS(cl::van_vleck_prefactor(pot, traj), FocalPoint);
  }
}

TEST_CASE("prefactor modulus cross-checked by action finite differences") {
  // |VanVleck| should equal |d2 S_cl / dx_f dx_i / (2 pi hbar)|^(1/2) with the
  // mixed derivative taken numerically over BVP endpoints.
  auto cross_check = [&](const Potential& pot, double xi, double xf, double t,
                         double guess) {
    const int n = 2000;
    const double d = 1e-3;
    auto s_of = [&](double a, double b) {
      return cl::action(cl::solve_bvp(pot, a, b, t, n, guess), pot).value;
    };
    const double mixed = (s_of(xi + d, xf + d) - s_of(xi + d, xf - d) -
                          s_of(xi - d, xf + d) + s_of(xi - d, xf - d)) /
                         (4.0 * d * d);
    const auto traj = cl::solve_bvp(pot, xi, xf, t, n, guess);
    const double mod = std::abs(cl::van_vleck_prefactor(pot, traj).value);
    const double ref = std::sqrt(std::abs(mixed) / (2.0 * M_PI));
    CHECK_THAT(mod, WithinRel(ref, 1e-4));
  };
  cross_check(Potential::free(), 0.0, 1.0, 1.0, 1.0);
  cross_check(Potential::harmonic(1.0), 0.1, 0.8, 1.2, 0.6);
}

TEST_CASE("packet_width examples") {
  const auto pot = Potential::harmonic(1.0);
  const auto traj = cl::solve_ivp(pot, 0.0, 1.0, 1.0, 100);
  SECTION("harmonic natural units") {
    CHECK_THAT(cl::packet_width(pot, traj, 0.5), WithinAbs(std::sqrt(0.5), 1e-12));
  }
  SECTION("flat potential is rejected") {
    const auto free_traj = cl::solve_ivp(Potential::free(), 0.0, 1.0, 1.0, 10);
    CHECK_THROWS_AS(cl::packet_width(Potential::free(), free_traj, 0.5),
                    FlatPotential);
  }
  SECTION("width scales as sqrt(hbar)") {
    Units u;
    u.hbar = 4.0;
    CHECK_THAT(cl::packet_width(pot, traj, 0.5, u),
               WithinAbs(2.0 * cl::packet_width(pot, traj, 0.5), 1e-12));
  }
}

TEST_CASE("classicality_ratio examples") {
  SECTION("harmonic has vanishing third-order change") {
    const auto pot = Potential::harmonic(1.0);
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, 1.0, 100);
    CHECK(cl::classicality_ratio(pot, traj, 0.3, 3) == 0.0);
  }
  SECTION("quartic V = x^4/4 at x = 1") {
    const auto pot = Potential::quartic(0.0, 0.25);
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, 1e-9, 2);
    // V'' = 3, V''' = 6: ratio = 2 * 3^(-1/4)
    CHECK_THAT(cl::classicality_ratio(pot, traj, 0.0, 3),
               WithinAbs(2.0 * std::pow(3.0, -0.25), 1e-9));
  }
  SECTION("ratio shrinks by 10 when hbar drops by 100 (n = 3)") {
    const auto pot = Potential::quartic(0.0, 0.25);
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, 1e-9, 2);
    Units u;
    u.hbar = 0.01;
    CHECK_THAT(cl::classicality_ratio(pot, traj, 0.0, 3, u),
               WithinRel(0.1 * cl::classicality_ratio(pot, traj, 0.0, 3),
                         1e-12));
  }
  SECTION("monotone decreasing in mass and in 1/hbar") {
    const auto pot = Potential::quartic(0.1, 0.3);
    const auto traj = cl::solve_ivp(pot, 0.8, 0.0, 1e-9, 2, {1.0, 1.0});
    double prev = 1e300;
    for (double m : {0.5, 1.0, 2.0, 4.0}) {
      Units u;
      u.mass = m;
      const double r = cl::classicality_ratio(pot, traj, 0.0, 3, u);
      CHECK(r < prev);
      prev = r;
    }
    prev = 1e300;
    for (double hb : {2.0, 1.0, 0.5, 0.25}) {
      Units u;
      u.hbar = hb;
      const double r = cl::classicality_ratio(pot, traj, 0.0, 3, u);
      CHECK(r < prev);
      prev = r;
    }
  }
  SECTION("n outside {3,4} is rejected") {
    const auto pot = Potential::quartic(0.0, 0.25);
    const auto traj = cl::solve_ivp(pot, 1.0, 0.0, 1.0, 10);
    CHECK_THROWS_AS(cl::classicality_ratio(pot, traj, 0.0, 5), InvalidArgument);
  }
}
