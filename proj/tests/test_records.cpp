#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "pathmeas/classical.hpp"
#include "pathmeas/records.hpp"
#include "pathmeas/scatter.hpp"

using namespace pathmeas;
namespace rc = pathmeas::records;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory free_path(double x0, double v, double t, int n) {
  return classical::solve_ivp(Potential::free(), x0, v, t, n);
}

}  // namespace

TEST_CASE("sample_records basics") {
  const double t = 1.0;
  const int n_steps = 32;
  const double dt = t / n_steps;
  const auto r_cl = free_path(0.0, 0.5, t, n_steps);

  SECTION("vanishing alpha collapses onto the classical path") {
    const double alpha = 1e-8;
    const double sigma = std::sqrt(3.0 * alpha * alpha /
                                   (8.0 * M_PI * M_PI * dt));
    const auto ens = rc::sample_records(r_cl, alpha, dt, 200, 1);
    double worst = 0.0;
    for (const auto& rec : ens.records)
      for (std::size_t j = 0; j < rec.size(); ++j) {
        const Vec3 d = rec.readouts[j] - r_cl.positions[j];
        worst = std::max({worst, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
      }
    CHECK(worst < 6.0 * sigma);
  }

  SECTION("per-bin variance matches 3 alpha^2 / (8 pi^2 dt)") {
    const double alpha = 0.5;
    const auto ens = rc::sample_records(r_cl, alpha, dt, 10000, 17);
    const auto stats = rc::record_statistics(ens);
    const double ref = 3.0 * alpha * alpha / (8.0 * M_PI * M_PI * dt);
    double mean_var = 0.0;
    for (const auto& v : stats.variance) mean_var += (v.x + v.y + v.z) / 3.0;
    mean_var /= static_cast<double>(stats.variance.size());
    CHECK_THAT(mean_var, WithinRel(ref, 0.05));
  }

  SECTION("ensemble mean tracks the classical path") {
    const double alpha = 0.5;
    const int n_records = 10000;
    const auto ens = rc::sample_records(r_cl, alpha, dt, n_records, 99);
    const auto stats = rc::record_statistics(ens);
    const double sigma = std::sqrt(3.0 * alpha * alpha /
                                   (8.0 * M_PI * M_PI * dt));
    const double bound = 4.0 * sigma / std::sqrt(static_cast<double>(n_records));
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
      const Vec3 d = stats.mean[j] - r_cl.positions[j];
      CHECK(std::abs(d.x) < bound);
      CHECK(std::abs(d.y) < bound);
      CHECK(std::abs(d.z) < bound);
    }
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(rc::sample_records(r_cl, -1.0, dt, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(rc::sample_records(r_cl, 0.5, dt * 2.0, 10, 1),
                    InvalidArgument);
  }
}

TEST_CASE("equal seeds give bit-identical ensembles, any thread count") {
  const auto r_cl = free_path(0.0, 0.3, 1.0, 16);
  const auto a = rc::sample_records(r_cl, 0.4, 1.0 / 16, 64, 12345, 1);
  const auto b = rc::sample_records(r_cl, 0.4, 1.0 / 16, 64, 12345, 4);
  const auto c = rc::sample_records(r_cl, 0.4, 1.0 / 16, 64, 54321, 1);
  REQUIRE(a.records.size() == b.records.size());
  bool all_equal = true, any_differs_from_c = false;
  for (std::size_t k = 0; k < a.records.size(); ++k)
    for (std::size_t j = 0; j < a.records[k].size(); ++j) {
      const Vec3 &va = a.records[k].readouts[j], &vb = b.records[k].readouts[j];
      if (va.x != vb.x || va.y != vb.y || va.z != vb.z) all_equal = false;
      const Vec3& vc = c.records[k].readouts[j];
      if (va.x != vc.x) any_differs_from_c = true;
    }
  CHECK(all_equal);
  CHECK(any_differs_from_c);
}

TEST_CASE("record_statistics") {
  const auto r_cl = free_path(0.0, 0.5, 1.0, 64);
  const double dt = 1.0 / 64;

  SECTION("whiteness: residual autocorrelation inside the CI") {
    const int n_records = 2000;
    const auto ens = rc::sample_records(r_cl, 0.5, dt, n_records, 7);
    const auto stats = rc::record_statistics(ens);
    CHECK(stats.autocorr[0] == 1.0);
    const double ci = 4.0 / std::sqrt(static_cast<double>(n_records) *
                                      static_cast<double>(r_cl.size()));
    for (std::size_t lag = 1; lag < stats.autocorr.size(); ++lag)
      CHECK(std::abs(stats.autocorr[lag]) < ci);
  }

  SECTION("a duplicated record has zero variance") {
    auto ens = rc::sample_records(r_cl, 0.5, dt, 1, 3);
    ens.records.push_back(ens.records.front());
    const auto stats = rc::record_statistics(ens);
    for (const auto& v : stats.variance) {
      CHECK(v.x == 0.0);
      CHECK(v.y == 0.0);
      CHECK(v.z == 0.0);
    }
  }

  SECTION("scaling residuals by two scales variance by four") {
    auto ens = rc::sample_records(r_cl, 0.5, dt, 500, 21);
    const auto base = rc::record_statistics(ens);
    for (auto& rec : ens.records)
      for (std::size_t j = 0; j < rec.size(); ++j) {
        const Vec3 d = rec.readouts[j] - r_cl.positions[j];
        rec.readouts[j] = r_cl.positions[j] + d * 2.0;
      }
    const auto scaled = rc::record_statistics(ens);
    for (std::size_t j = 0; j < base.variance.size(); ++j) {
      CHECK_THAT(scaled.variance[j].x, WithinRel(4.0 * base.variance[j].x, 1e-9));
      CHECK_THAT(scaled.variance[j].z, WithinRel(4.0 * base.variance[j].z, 1e-9));
    }
  }

  SECTION("needs at least two records") {
    const auto ens = rc::sample_records(r_cl, 0.5, dt, 1, 3);
    CHECK_THROWS_AS(rc::record_statistics(ens), InvalidArgument);
  }
}

TEST_CASE("mean log weight identity") {
  // E[-log of the squared-amplitude weight] = 3 n_steps / 2.
  const int n_steps = 48;
  const auto r_cl = free_path(0.0, 0.4, 1.0, n_steps);
  const double dt = 1.0 / n_steps, alpha = 0.6;
  const auto ens = rc::sample_records(r_cl, alpha, dt, 4000, 31);
  double acc = 0.0;
  for (const auto& rec : ens.records)
    acc += -2.0 * scatter::continuum_weight(rec, r_cl, alpha);
  acc /= static_cast<double>(ens.records.size());
  CHECK_THAT(acc, WithinRel(1.5 * n_steps, 0.05));
}

TEST_CASE("redundancy_report") {
  const int n_steps = 256;
  const auto r_cl = free_path(0.0, 0.3, 1.0, n_steps);
  const double dt = 1.0 / n_steps;
  const auto ens = rc::sample_records(r_cl, 0.5, dt, 128, 2024);

  SECTION("error shrinks with the fraction like 1/sqrt(f)") {
    const double fractions[] = {1.0, 0.5, 0.25};
    const auto rep = rc::redundancy_report(ens, fractions, 16, 5);
    REQUIRE(rep.size() == 3);
    CHECK(rep[0].rms_error <= rep[1].rms_error);
    CHECK(rep[1].rms_error <= rep[2].rms_error);
    CHECK_THAT(rep[1].rms_error / rep[0].rms_error,
               WithinAbs(std::sqrt(2.0), 0.2 * std::sqrt(2.0)));
    CHECK_THAT(rep[2].rms_error / rep[0].rms_error, WithinAbs(2.0, 0.4));
  }

  SECTION("disjoint halves agree within pooled error bars") {
    const auto stats = rc::record_statistics(ens);
    const double n_half = static_cast<double>(ens.records.size()) / 2.0;
    std::size_t violations = 0;
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
      const Vec3 d = stats.mean_first_half[j] - stats.mean_second_half[j];
      const Vec3 v = stats.variance[j];
      const double sex = std::sqrt(2.0 * v.x / n_half);
      const double sey = std::sqrt(2.0 * v.y / n_half);
      const double sez = std::sqrt(2.0 * v.z / n_half);
      if (std::abs(d.x) > 4.0 * sex) ++violations;
      if (std::abs(d.y) > 4.0 * sey) ++violations;
      if (std::abs(d.z) > 4.0 * sez) ++violations;
    }
    CHECK(violations == 0);
  }

  SECTION("empty fragments are reported") {
    const double tiny[] = {1e-4};
    CHECK_THROWS_AS(rc::redundancy_report(ens, tiny, 16, 5), EmptyFragment);
  }

  SECTION("fraction range validation") {
    const double bad[] = {1.5};
    CHECK_THROWS_AS(rc::redundancy_report(ens, bad, 16, 5), InvalidArgument);
  }
}
