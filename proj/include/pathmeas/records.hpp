#pragma once

// Measurement-record sampling from the joint-amplitude weight, record
// statistics (the stochastic r_meas = r_cl + alpha*noise model), and the
// fragment-redundancy proxy.
//
// Sampling density: squaring the joint amplitude gives an independent
// Gaussian per time node and component with variance
//   sigma^2 = 3 alpha^2 / (8 pi^2 dt),
// the unique variance matching exp(-x^2/(2 sigma^2)) to the per-step squared
// weight factor exp(-(4 pi^2 dt / 3 alpha^2) x^2).
//
// Randomness is mt19937_64 with an explicit stream split: record k draws from
// an engine seeded with splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15), and
// normal variates come from an in-repo Box-Muller, so equal seeds give
// bit-identical ensembles for any thread count on a given platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pathmeas/core.hpp"
#include "pathmeas/scatter.hpp"

namespace pathmeas::records {

using scatter::ProbeRecord;

struct RecordEnsemble {
  std::vector<ProbeRecord> records;
  Trajectory r_cl;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

struct RecordStats {
  std::vector<Vec3> mean;           // per time bin
  std::vector<Vec3> variance;       // per time bin, per component (unbiased)
  std::vector<double> autocorr;     // residual autocorrelation, lags 0..10
  std::vector<Vec3> mean_first_half;   // subset estimates over the
  std::vector<Vec3> mean_second_half;  // first/second half of the ensemble
};

struct RedundancyPoint {
  double fraction = 0.0;
  double rms_error = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t record_stream_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Box-Muller normals from explicit uniforms; pairs cached per generator.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  double uniform01() {  // in (0, 1], safe under log
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace detail

/// Samples n_records measurement records around the classical path:
/// readout_j = r_cl(tau_j) + N(0, sigma^2) per component, sigma^2 = 3
/// alpha^2/(8 pi^2 dt). dt must match the trajectory's own step.
inline RecordEnsemble sample_records(const Trajectory& r_cl, double alpha,
                                     double dt, int n_records,
                                     std::uint64_t seed, int n_threads = 1) {
  r_cl.validate();
  if (!(alpha > 0.0) || !(dt > 0.0))
    throw InvalidArgument("sample_records: alpha and dt must be > 0");
  if (n_records < 1)
    throw InvalidArgument("sample_records: n_records >= 1 required");
  if (std::abs(dt - r_cl.dt()) > 1e-9 * std::max(1.0, r_cl.dt()))
    throw InvalidArgument("sample_records: dt differs from trajectory step");

  const double sigma =
      alpha * std::sqrt(3.0 / (8.0 * dt)) / M_PI;  // sqrt(3 a^2/(8 pi^2 dt))
  const std::size_t n_nodes = r_cl.size();

  RecordEnsemble ens;
  ens.r_cl = r_cl;
  ens.alpha = alpha;
  ens.seed = seed;
  ens.records.resize(static_cast<size_t>(n_records));

  auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      detail::Gaussian g(detail::record_stream_seed(seed, k));
      ProbeRecord rec;
      rec.times = r_cl.times;
      rec.alpha = alpha;
      rec.readouts.resize(n_nodes);
      for (std::size_t j = 0; j < n_nodes; ++j) {
        rec.readouts[j] = r_cl.positions[j] +
                          Vec3{sigma * g(), sigma * g(), sigma * g()};
      }
      ens.records[k] = std::move(rec);
    }
  };

  const int workers = std::clamp(n_threads, 1, n_records);
  if (workers == 1) {
    fill(0, static_cast<size_t>(n_records));
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk =
        (static_cast<size_t>(n_records) + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = static_cast<size_t>(w) * chunk;
      const std::size_t hi =
          std::min(lo + chunk, static_cast<size_t>(n_records));
      if (lo < hi) pool.emplace_back(fill, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return ens;
}

/// Per-bin means and variances plus residual whiteness: pooled lag-0..10
/// autocorrelation of r_p - r_cl across records and components.
inline RecordStats record_statistics(const RecordEnsemble& ens) {
  if (ens.records.size() < 2)
    throw InvalidArgument("record_statistics: need >= 2 records");
  const std::size_t n_rec = ens.records.size();
  const std::size_t n_nodes = ens.r_cl.size();

  RecordStats st;
  st.mean.assign(n_nodes, Vec3{});
  st.variance.assign(n_nodes, Vec3{});
  st.mean_first_half.assign(n_nodes, Vec3{});
  st.mean_second_half.assign(n_nodes, Vec3{});

  const std::size_t half = n_rec / 2;
  for (std::size_t k = 0; k < n_rec; ++k) {
    const auto& r = ens.records[k].readouts;
    for (std::size_t j = 0; j < n_nodes; ++j) {
      st.mean[j] = st.mean[j] + r[j];
      auto& sub = (k < half) ? st.mean_first_half[j] : st.mean_second_half[j];
      sub = sub + r[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n_rec);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    st.mean[j] = st.mean[j] * inv_n;
    st.mean_first_half[j] =
        st.mean_first_half[j] * (half > 0 ? 1.0 / static_cast<double>(half) : 0.0);
    st.mean_second_half[j] =
        st.mean_second_half[j] * (1.0 / static_cast<double>(n_rec - half));
  }
  for (std::size_t k = 0; k < n_rec; ++k) {
    const auto& r = ens.records[k].readouts;
    for (std::size_t j = 0; j < n_nodes; ++j) {
      const Vec3 d = r[j] - st.mean[j];
      st.variance[j] =
          st.variance[j] + Vec3{d.x * d.x, d.y * d.y, d.z * d.z};
    }
  }
  const double inv_nm1 = 1.0 / static_cast<double>(n_rec - 1);
  for (std::size_t j = 0; j < n_nodes; ++j)
    st.variance[j] = st.variance[j] * inv_nm1;

  const int max_lag = 10;
  st.autocorr.assign(static_cast<size_t>(max_lag) + 1, 0.0);
  double denom = 0.0;
  std::vector<double> num(static_cast<size_t>(max_lag) + 1, 0.0);
  for (std::size_t k = 0; k < n_rec; ++k) {
    const auto& r = ens.records[k].readouts;
    for (int c = 0; c < 3; ++c) {
      auto res = [&](std::size_t j) {
        const Vec3 d = r[j] - ens.r_cl.positions[j];
        return c == 0 ? d.x : (c == 1 ? d.y : d.z);
      };
      for (std::size_t j = 0; j < n_nodes; ++j) {
        const double e = res(j);
        denom += e * e;
        for (int lag = 1; lag <= max_lag; ++lag)
          if (j + static_cast<size_t>(lag) < n_nodes)
            num[static_cast<size_t>(lag)] += e * res(j + static_cast<size_t>(lag));
      }
    }
  }
  st.autocorr[0] = 1.0;
  for (int lag = 1; lag <= max_lag; ++lag)
    st.autocorr[static_cast<size_t>(lag)] =
        denom > 0.0 ? num[static_cast<size_t>(lag)] / denom : 0.0;
  return st;
}

/// Darwinian redundancy proxy: estimate the classical path per time window
/// from a random fraction f of the pooled per-step readouts and report the
/// RMS estimation error against the window means of r_cl. Unbiased for any
/// f, with error scaling as 1/sqrt(f * readouts-per-window).
inline std::vector<RedundancyPoint> redundancy_report(
    const RecordEnsemble& ens, std::span<const double> fractions,
    int window_bins = 8, std::uint64_t selection_seed = 0x5EEDF00DULL) {
  if (ens.records.empty())
    throw InvalidArgument("redundancy_report: empty ensemble");
  for (double f : fractions)
    if (!(f > 0.0) || f > 1.0)
      throw InvalidArgument("redundancy_report: fractions must lie in (0, 1]");
  if (window_bins < 1)
    throw InvalidArgument("redundancy_report: window_bins >= 1");

  const std::size_t n_rec = ens.records.size();
  const std::size_t n_nodes = ens.r_cl.size();
  const std::size_t n_windows = n_nodes / static_cast<size_t>(window_bins);
  if (n_windows == 0)
    throw InvalidArgument("redundancy_report: window wider than the record");

  std::vector<RedundancyPoint> out;
  out.reserve(fractions.size());
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double f = fractions[fi];
    double sq_sum = 0.0;
    std::size_t sq_count = 0;
    for (std::size_t w = 0; w < n_windows; ++w) {
      const std::size_t j0 = w * static_cast<size_t>(window_bins);
      const std::size_t j1 = j0 + static_cast<size_t>(window_bins);
      const std::size_t pool = n_rec * static_cast<size_t>(window_bins);
      const auto take = static_cast<std::size_t>(
          std::llround(f * static_cast<double>(pool)));
      if (take == 0)
        throw EmptyFragment("redundancy_report: fraction " +
                            std::to_string(f) + " selects no probes in window " +
                            std::to_string(w));

      // Partial Fisher-Yates over the pooled (record, node) indices.
      std::vector<std::size_t> index(pool);
      for (std::size_t i = 0; i < pool; ++i) index[i] = i;
      std::mt19937_64 eng(detail::splitmix64(
          selection_seed + 1315423911ULL * (fi + 1) + 2654435761ULL * (w + 1)));
      Vec3 est{};
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(eng() % (pool - i));
        std::swap(index[i], index[j]);
        const std::size_t rec = index[i] / static_cast<size_t>(window_bins);
        const std::size_t node = j0 + index[i] % static_cast<size_t>(window_bins);
        est = est + ens.records[rec].readouts[node];
      }
      est = est * (1.0 / static_cast<double>(take));

      Vec3 truth{};
      for (std::size_t j = j0; j < j1; ++j)
        truth = truth + ens.r_cl.positions[j];
      truth = truth * (1.0 / static_cast<double>(window_bins));

      const Vec3 d = est - truth;
      sq_sum += d.norm2();
      sq_count += 3;
    }
    out.push_back({f, std::sqrt(sq_sum / static_cast<double>(sq_count))});
  }
  return out;
}

}  // namespace pathmeas::records
