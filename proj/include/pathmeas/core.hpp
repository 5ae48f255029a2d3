#pragma once

// Shared domain types: units, grids, potentials, wave functions, trajectories.
// Everything here is immutable after construction and safe to share across
// threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathmeas {

using Complex = std::complex<double>;

// Centralized tolerance constants (reproducibility of the acceptance checks
// depends on these never drifting per call site).
namespace tol {
inline constexpr double zero_norm = 1e-14;
inline constexpr double grid_uniformity = 1e-12;
inline constexpr double flat_potential = 1e-12;
inline constexpr double focal_point = 1e-10;
inline constexpr double elastic_modulus = 1e-9;   // relative, |K_f| vs |K_i|
inline constexpr double bvp_residual = 1e-8;
inline constexpr double direction_norm = 1e-12;
inline constexpr double flat_pattern = 1e-14;
}  // namespace tol

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PATHMEAS_DEFINE_ERROR(NAME)                          \
  struct NAME : Error {                                      \
    explicit NAME(const std::string& msg) : Error(msg) {}    \
  }

PATHMEAS_DEFINE_ERROR(InvalidBounds);
PATHMEAS_DEFINE_ERROR(TooFewPoints);
PATHMEAS_DEFINE_ERROR(UnsupportedOrder);
PATHMEAS_DEFINE_ERROR(ZeroNorm);
PATHMEAS_DEFINE_ERROR(NonFinite);
PATHMEAS_DEFINE_ERROR(NoConvergence);
PATHMEAS_DEFINE_ERROR(FocalPoint);
PATHMEAS_DEFINE_ERROR(FlatPotential);
PATHMEAS_DEFINE_ERROR(BoundaryLeak);
PATHMEAS_DEFINE_ERROR(TooLarge);
PATHMEAS_DEFINE_ERROR(SeriesDiverges);
PATHMEAS_DEFINE_ERROR(BadOutcome);
PATHMEAS_DEFINE_ERROR(FlatPattern);
PATHMEAS_DEFINE_ERROR(EmptyFragment);
PATHMEAS_DEFINE_ERROR(InvalidArgument);

#undef PATHMEAS_DEFINE_ERROR

/// Natural units by default; both strictly positive.
struct Units {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0))
      throw InvalidArgument("Units: hbar and mass must be positive");
  }
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  int n_points = 0;
};

/// Uniform rectangular grid, 1D or 3D. Spacing per axis is exactly
/// (max - min) / (n_points - 1).
class SpatialGrid {
 public:
  SpatialGrid(int dim, std::span<const AxisSpec> axes) : dim_(dim) {
    if (dim != 1 && dim != 3)
      throw InvalidArgument("SpatialGrid: dim must be 1 or 3");
    if (static_cast<int>(axes.size()) != dim)
      throw InvalidArgument("SpatialGrid: need one AxisSpec per dimension");
    for (int a = 0; a < dim; ++a) {
      if (!(axes[a].max > axes[a].min))
        throw InvalidBounds("SpatialGrid: max must exceed min on axis " +
                            std::to_string(a));
      if (axes[a].n_points < 2)
        throw TooFewPoints("SpatialGrid: n_points >= 2 required on axis " +
                           std::to_string(a));
      axes_[a] = axes[a];
    }
  }

  static SpatialGrid make_1d(double min, double max, int n_points) {
    const AxisSpec ax{min, max, n_points};
    return SpatialGrid(1, std::span<const AxisSpec>(&ax, 1));
  }

  int dim() const { return dim_; }
  const AxisSpec& axis(int a) const { return axes_[static_cast<size_t>(a)]; }

  double spacing(int a = 0) const {
    const AxisSpec& ax = axes_[static_cast<size_t>(a)];
    return (ax.max - ax.min) / (ax.n_points - 1);
  }

  double coord(int index, int a = 0) const {
    const AxisSpec& ax = axes_[static_cast<size_t>(a)];
    if (index == ax.n_points - 1) return ax.max;  // exact endpoints
    return ax.min + spacing(a) * index;
  }

  /// Nearest grid index along axis a; exact inverse of coord() on-node.
  int index_of(double x, int a = 0) const {
    const AxisSpec& ax = axes_[static_cast<size_t>(a)];
    int i = static_cast<int>(std::lround((x - ax.min) / spacing(a)));
    return std::clamp(i, 0, ax.n_points - 1);
  }

  std::size_t total_points() const {
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a)
      n *= static_cast<std::size_t>(axes_[static_cast<size_t>(a)].n_points);
    return n;
  }

  /// Volume element h^dim of the grid measure.
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
  }

 private:
  int dim_;
  std::array<AxisSpec, 3> axes_{};
};

inline SpatialGrid make_grid(int dim, std::span<const AxisSpec> bounds) {
  return SpatialGrid(dim, bounds);
}

enum class PotentialKind { Free, Harmonic, Quartic, DoubleWell, Tabulated };

/// Potential families with analytic derivatives through fourth order.
///   Free:            V = 0
///   Harmonic(w):     V = (1/2) m w^2 x^2        (m carried by the potential)
///   Quartic(a,b):    V = a x^2 + b x^4
///   DoubleWell(a,b): V = a (x^2 - b^2)^2        (minima at +-b)
///   Tabulated:       values on a 1D grid; derivatives by O(h^2) central
///                    stencils at the nearest node.
class Potential {
 public:
  static Potential free() { return Potential(PotentialKind::Free); }

  static Potential harmonic(double omega, double mass = 1.0) {
    Potential p(PotentialKind::Harmonic);
    p.p0_ = omega;
    p.p1_ = mass;
    return p;
  }

  static Potential quartic(double a, double b) {
    Potential p(PotentialKind::Quartic);
    p.p0_ = a;
    p.p1_ = b;
    return p;
  }

  static Potential double_well(double a, double b) {
    Potential p(PotentialKind::DoubleWell);
    p.p0_ = a;
    p.p1_ = b;
    return p;
  }

  static Potential tabulated(SpatialGrid grid, std::vector<double> values) {
    if (grid.dim() != 1)
      throw InvalidArgument("Potential::tabulated: 1D grids only");
    if (values.size() != grid.total_points())
      throw InvalidArgument("Potential::tabulated: value count != grid size");
    if (grid.axis(0).n_points < 5)
      throw TooFewPoints("Potential::tabulated: need >= 5 nodes for stencils");
    Potential p(PotentialKind::Tabulated);
    p.table_grid_.emplace_back(grid);
    p.table_ = std::move(values);
    return p;
  }

  PotentialKind kind() const { return kind_; }

  double operator()(double x, int order = 0) const {
    if (order < 0 || order > 4)
      throw UnsupportedOrder("Potential: derivative order must be in [0,4]");
    switch (kind_) {
      case PotentialKind::Free:
        return 0.0;
      case PotentialKind::Harmonic: {
        const double k = p1_ * p0_ * p0_;  // m w^2
        switch (order) {
          case 0: return 0.5 * k * x * x;
          case 1: return k * x;
          case 2: return k;
          default: return 0.0;
        }
      }
      case PotentialKind::Quartic: {
        switch (order) {
          case 0: return p0_ * x * x + p1_ * x * x * x * x;
          case 1: return 2.0 * p0_ * x + 4.0 * p1_ * x * x * x;
          case 2: return 2.0 * p0_ + 12.0 * p1_ * x * x;
          case 3: return 24.0 * p1_ * x;
          default: return 24.0 * p1_;
        }
      }
      case PotentialKind::DoubleWell: {
        const double u = x * x - p1_ * p1_;
        switch (order) {
          case 0: return p0_ * u * u;
          case 1: return 4.0 * p0_ * x * u;
          case 2: return p0_ * (12.0 * x * x - 4.0 * p1_ * p1_);
          case 3: return 24.0 * p0_ * x;
          default: return 24.0 * p0_;
        }
      }
      case PotentialKind::Tabulated:
        return eval_tabulated(x, order);
    }
    throw Error("Potential: unreachable");
  }

 private:
  explicit Potential(PotentialKind k) : kind_(k) {}

  double eval_tabulated(double x, int order) const {
    const SpatialGrid& g = table_grid_.front();
    const double h = g.spacing();
    const int n = g.axis(0).n_points;
    // Stencils need two nodes on each side.
    const int i = std::clamp(g.index_of(x), 2, n - 3);
    auto f = [&](int k) { return table_[static_cast<size_t>(i + k)]; };
    switch (order) {
      case 0: {
        // Local cubic through the 4 surrounding nodes.
        const int j = std::clamp(g.index_of(x - 0.5 * h), 1, n - 3);
        const double t = (x - g.coord(j)) / h;
        auto y = [&](int k) { return table_[static_cast<size_t>(j + k)]; };
        const double c0 = y(0);
        const double c1 = y(1) - y(-1);
        const double c2 = 2.0 * y(-1) - 5.0 * y(0) + 4.0 * y(1) - y(2);
        const double c3 = -y(-1) + 3.0 * y(0) - 3.0 * y(1) + y(2);
        return c0 + 0.5 * t * (c1 + t * (c2 + t * c3));
      }
      case 1: return (f(1) - f(-1)) / (2.0 * h);
      case 2: return (f(1) - 2.0 * f(0) + f(-1)) / (h * h);
      case 3: return (-f(-2) + 2.0 * f(-1) - 2.0 * f(1) + f(2)) / (2.0 * h * h * h);
      default:
        return (f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2)) /
               (h * h * h * h);
    }
  }

  PotentialKind kind_;
  double p0_ = 0.0, p1_ = 0.0;
  std::vector<SpatialGrid> table_grid_;  // empty unless Tabulated
  std::vector<double> table_;
};

inline double eval_potential(const Potential& v, double x, int order) {
  return v(x, order);
}

struct WaveFunction {
  SpatialGrid grid;
  std::vector<Complex> amplitudes;

  WaveFunction(SpatialGrid g, std::vector<Complex> a)
      : grid(std::move(g)), amplitudes(std::move(a)) {
    if (amplitudes.size() != grid.total_points())
      throw InvalidArgument("WaveFunction: amplitude count != grid size");
  }
};

inline double l2_norm(const WaveFunction& psi) {
  double s = 0.0;
  for (const Complex& a : psi.amplitudes) s += std::norm(a);
  return std::sqrt(s * psi.grid.cell_volume());
}

inline WaveFunction normalize(const WaveFunction& psi) {
  const double n = l2_norm(psi);
  if (n < tol::zero_norm) throw ZeroNorm("normalize: state has zero norm");
  WaveFunction out = psi;
  // Already unit norm up to rounding: keep the amplitudes bit-identical so
  // normalization is idempotent.
  if (std::abs(n - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon())
    return out;
  const double inv = 1.0 / n;
  for (Complex& a : out.amplitudes) a *= inv;
  return out;
}

/// Time-sampled phase-space path on a uniform time grid. 1D paths are
/// embedded as (x, 0, 0).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<Vec3> momenta;
  int dim = 1;

  Trajectory() = default;
  Trajectory(std::vector<double> t, std::vector<Vec3> q, std::vector<Vec3> p,
             int d = 1)
      : times(std::move(t)), positions(std::move(q)), momenta(std::move(p)),
        dim(d) {
    validate();
  }

  std::size_t size() const { return times.size(); }

  double dt() const {
    if (times.size() < 2)
      throw InvalidArgument("Trajectory: need >= 2 samples for a step");
    return times[1] - times[0];
  }

  double duration() const { return times.back() - times.front(); }

  double x(std::size_t i) const { return positions[i].x; }
  double p(std::size_t i) const { return momenta[i].x; }

  void validate() const {
    if (positions.size() != times.size() || momenta.size() != times.size())
      throw InvalidArgument("Trajectory: array lengths differ");
    if (times.size() < 2) return;
    const double step = times[1] - times[0];
    if (!(step > 0.0))
      throw InvalidArgument("Trajectory: times must strictly increase");
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double d = times[i] - times[i - 1];
      if (std::abs(d - step) > tol::grid_uniformity * std::max(1.0, std::abs(step)))
        throw InvalidArgument("Trajectory: non-uniform time grid");
    }
  }

  /// Cubic Hermite interpolation of position (uses stored momenta as
  /// derivatives, v = p/m).
  Vec3 position_at(double t, double mass = 1.0) const {
    if (times.empty()) throw InvalidArgument("Trajectory: empty");
    if (t <= times.front()) return positions.front();
    if (t >= times.back()) return positions.back();
    const double step = dt();
    auto seg = static_cast<std::size_t>((t - times.front()) / step);
    seg = std::min(seg, times.size() - 2);
    const double u = (t - times[seg]) / step;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    const Vec3 v0 = momenta[seg] * (1.0 / mass);
    const Vec3 v1 = momenta[seg + 1] * (1.0 / mass);
    return positions[seg] * h00 + v0 * (h10 * step) + positions[seg + 1] * h01 +
           v1 * (h11 * step);
  }
};

}  // namespace pathmeas
