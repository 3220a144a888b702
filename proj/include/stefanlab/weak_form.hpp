#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "solver.hpp"

namespace stefanlab {

/// Axis-aligned box in space.
struct Region {
  Point lower{0.0, 0.0};
  Point upper{0.0, 0.0};

  static Region whole(const Grid& g) { return {g.lower(), g.upper()}; }
  static Region box(Point center, double radius) {
    return {{center[0] - radius, center[1] - radius}, {center[0] + radius, center[1] + radius}};
  }

  bool contains(const Point& x, int dim) const {
    if (x[0] < lower[0] || x[0] > upper[0]) return false;
    return dim == 1 || (x[1] >= lower[1] && x[1] <= upper[1]);
  }

  bool inside(const Grid& g, double slack = 1e-12) const {
    const Point lo = g.lower(), hi = g.upper();
    const double s = slack * (1.0 + g.extent[0]);
    if (lower[0] < lo[0] - s || upper[0] > hi[0] + s || !(upper[0] > lower[0])) return false;
    if (g.dim == 2 && (lower[1] < lo[1] - s || upper[1] > hi[1] + s || !(upper[1] > lower[1]))) return false;
    return true;
  }

  bool covers(const Grid& g, double slack = 1e-12) const {
    const Point lo = g.lower(), hi = g.upper();
    const double s = slack * (1.0 + g.extent[0]);
    if (lower[0] > lo[0] + s || upper[0] < hi[0] - s) return false;
    return g.dim == 1 || (lower[1] <= lo[1] + s && upper[1] >= hi[1] - s);
  }
};

struct TimeWindow {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Smooth space-time test function with analytic derivatives. The bump is a
/// tensor product of cos^2 profiles of half-width `radius` around `center`,
/// times a temporal factor 1 + time_slope (t - time_center).
struct TestFunction {
  enum class Kind { zero, constant, bump };

  Kind kind = Kind::zero;
  double amplitude = 0.0;
  Point center{0.0, 0.0};
  double radius = 1.0;
  double time_center = 0.0;
  double time_slope = 0.0;

  static TestFunction zero() { return {}; }
  static TestFunction constant(double value) { return {Kind::constant, value}; }
  static TestFunction bump(Point center, double radius, double amplitude = 1.0, double time_center = 0.0,
                           double time_slope = 0.0) {
    if (!(radius > 0.0)) throw InvalidArgument("bump radius must be positive");
    return {Kind::bump, amplitude, center, radius, time_center, time_slope};
  }

  double value(const Point& x, double t, int dim) const {
    if (kind == Kind::zero) return 0.0;
    if (kind == Kind::constant) return amplitude;
    return amplitude * profile(x, dim) * (1.0 + time_slope * (t - time_center));
  }

  double time_derivative(const Point& x, double, int dim) const {
    if (kind != Kind::bump) return 0.0;
    return amplitude * profile(x, dim) * time_slope;
  }

  double partial(const Point& x, double t, int dim, int axis) const {
    if (kind != Kind::bump) return 0.0;
    const double k = std::acos(-1.0) / (2.0 * radius);
    double out = amplitude * (1.0 + time_slope * (t - time_center));
    for (int a = 0; a < dim; ++a) {
      const double d = x[a] - center[a];
      if (std::abs(d) >= radius) return 0.0;
      const double c = std::cos(k * d);
      out *= a == axis ? -2.0 * k * c * std::sin(k * d) : c * c;
    }
    return out;
  }

  /// True when the test function vanishes outside `region`.
  bool supported_in(const Region& region, int dim) const {
    if (kind == Kind::zero) return true;
    if (kind == Kind::constant) return false;
    for (int a = 0; a < dim; ++a)
      if (center[a] - radius < region.lower[a] - 1e-12 || center[a] + radius > region.upper[a] + 1e-12)
        return false;
    return true;
  }

private:
  double profile(const Point& x, int dim) const {
    const double k = std::acos(-1.0) / (2.0 * radius);
    double out = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double d = x[a] - center[a];
      if (std::abs(d) >= radius) return 0.0;
      const double c = std::cos(k * d);
      out *= c * c;
    }
    return out;
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> window_levels(const Trajectory& traj, const TimeWindow& w) {
  if (traj.levels() == 0) throw InvalidArgument("empty trajectory");
  const double tol = 1e-12 * (1.0 + std::abs(traj.times.back()));
  if (!(w.t2 > w.t1) || w.t1 < traj.times.front() - tol || w.t2 > traj.times.back() + tol)
    throw InvalidArgument("time window lies outside the trajectory");
  std::size_t m1 = 0;
  while (m1 < traj.levels() && traj.times[m1] < w.t1 - tol) ++m1;
  std::size_t m2 = traj.levels() - 1;
  while (m2 > 0 && traj.times[m2] > w.t2 + tol) --m2;
  if (m1 >= m2) throw InvalidArgument("time window contains fewer than two time levels");
  return {m1, m2};
}

} // namespace detail

/// Discrete value of
///   int v phi dx |_{t1}^{t2} + int int [-v d_t phi + <A(Du), D phi>] dx dt
/// with v = e(u). The space integral is a sum over nodes in `region`; fluxes
/// are paired with the test-function gradient at face midpoints, and time
/// integrals use the right endpoint of each step, matching backward Euler.
inline double weak_form_residual(const Trajectory& traj, const TestFunction& phi, const TimeWindow& window,
                                 const Region& region) {
  const Grid& g = traj.grid();
  const Scenario& s = traj.scenario;
  if (!region.inside(g)) throw InvalidArgument("region lies outside the grid");
  if (!phi.supported_in(region, g.dim) &&
      !(region.covers(g) && s.boundary.is_zero_flux()))
    throw InvalidArgument("test function does not vanish on the lateral boundary of the region");
  const auto [m1, m2] = detail::window_levels(traj, window);
  if (phi.kind == TestFunction::Kind::zero) return 0.0;

  const double vol = g.cell_volume();
  auto slice = [&](std::size_t m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.position(i);
      if (region.contains(x, g.dim)) sum += traj.e[m][i] * phi.value(x, traj.times[m], g.dim);
    }
    return sum * vol;
  };
  double result = slice(m2) - slice(m1);
  const auto edges = g.edges();
  for (std::size_t m = m1 + 1; m <= m2; ++m) {
    const double t = traj.times[m], dt = traj.times[m] - traj.times[m - 1];
    double bulk = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.position(i);
      if (region.contains(x, g.dim)) bulk -= traj.e[m][i] * phi.time_derivative(x, t, g.dim);
    }
    for (const auto& e : edges) {
      const Point a = g.position(e.from), b = g.position(e.to);
      const Point mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
      if (!region.contains(mid, g.dim)) continue;
      const double grad = (traj.u[m][e.to] - traj.u[m][e.from]) / g.h;
      const double q = s.vector_field.weight(e.axis) * std::pow(std::abs(grad), s.p - 2.0) * grad;
      bulk += q * phi.partial(mid, t, g.dim, e.axis);
    }
    result += dt * bulk * vol;
  }
  return result;
}

} // namespace stefanlab
