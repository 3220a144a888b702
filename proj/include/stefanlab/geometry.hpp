#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "solver.hpp"

namespace stefanlab {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct AlphaKappa {
  double alpha;
  double kappa;
};

/// kappa / (kappa - 1), read as 1 when kappa is infinite.
inline double kappa_ratio(double kappa) { return std::isinf(kappa) ? 1.0 : kappa / (kappa - 1.0); }

/// Modulus exponent alpha and Sobolev exponent kappa, tied by
/// 1/alpha = 1 + kappa/(kappa-1). For p = n the exponent is a free choice below 1/2.
inline AlphaKappa alpha_kappa_of(int n, double p, std::optional<double> alpha_choice = std::nullopt) {
  if (n < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(p >= 2.0) || !std::isfinite(p)) throw InvalidArgument("p must be >= 2");
  const double nn = n;
  if (p < nn) return {p / (nn + p), nn / (nn - p)};
  if (p > nn) return {0.5, infinity};
  if (!alpha_choice) throw InvalidArgument("p = n requires an explicit alpha choice");
  const double a = *alpha_choice;
  if (!(a > 0.0 && a < 0.5)) throw InvalidArgument("alpha choice for p = n must lie in (0, 1/2)");
  const double q = 1.0 / a - 1.0;
  return {a, q / (q - 1.0)};
}

struct ModulusParams {
  int n = 1;
  double p = 2.0;
  double alpha = 0.5;
  double kappa = infinity;
  double L = 1.0;
  double M = 2.0;
  double r0 = 1.0;

  void validate() const {
    if (!(p >= 2.0)) throw InvalidArgument("p must be >= 2");
    if (!(alpha > 0.0 && alpha <= 0.5)) throw InvalidArgument("alpha must lie in (0, 1/2]");
    if (!(L > 0.0) || !(M > 0.0) || !(r0 > 0.0)) throw InvalidArgument("L, M and r0 must be positive");
  }

  /// omega in terms of ell = ln(r0 / r) >= 0; usable far below double range of r.
  double omega_log(double ell) const { return L * std::pow(p + ell, -alpha); }

  double omega(double r) const {
    if (!(r > 0.0) || r > r0 * (1.0 + 1e-12)) throw InvalidArgument("radius must lie in (0, r0]");
    return omega_log(std::max(0.0, std::log(r0 / r)));
  }

  /// r omega'(r) / omega(r).
  double omega_log_derivative(double r) const { return alpha / (p + std::max(0.0, std::log(r0 / r))); }
};

enum class CylinderFlavor { tilde, full, outer };

inline std::string to_string(CylinderFlavor f) {
  switch (f) {
  case CylinderFlavor::tilde: return "tilde";
  case CylinderFlavor::full: return "full";
  case CylinderFlavor::outer: return "outer";
  }
  return "unknown";
}

/// Closed ball of radius r around `center` times the slab [t_top - depth, t_top].
struct IntrinsicCylinder {
  Point center{0.0, 0.0};
  double t_top = 0.0;
  double r = 1.0;
  double depth = 1.0;
  CylinderFlavor flavor = CylinderFlavor::full;

  double t_bottom() const noexcept { return t_top - depth; }
  bool contains_point(const Point& x, int dim) const { return distance(x, center, dim) <= r * (1.0 + 1e-12); }
  bool contains_time(double t) const {
    const double s = 1e-12 * std::max(1.0, std::abs(t_top));
    return t >= t_bottom() - s && t <= t_top + s;
  }
};

/// Time depth of the flavour at radius r; `lambda_scale` >= 1 enters only the outer flavour.
inline double time_depth(const ModulusParams& mp, double r, CylinderFlavor flavor, double lambda_scale = 1.0) {
  const double w = mp.omega(r);
  switch (flavor) {
  case CylinderFlavor::tilde: return std::pow(w, 2.0 - mp.p) * std::pow(r, mp.p);
  case CylinderFlavor::full: return mp.M * std::pow(w, (2.0 - mp.p) * (1.0 + 1.0 / mp.alpha)) * std::pow(r, mp.p);
  case CylinderFlavor::outer:
    return std::pow(lambda_scale, 2.0 - mp.p) * time_depth(mp, r, CylinderFlavor::full);
  }
  return 0.0;
}

inline IntrinsicCylinder cylinder(const ModulusParams& mp, Point center, double t_top, double r,
                                  CylinderFlavor flavor, double lambda_scale = 1.0) {
  mp.validate();
  if (!(lambda_scale >= 1.0)) throw InvalidArgument("lambda_scale must be >= 1");
  return {center, t_top, r, time_depth(mp, r, flavor, lambda_scale), flavor};
}

/// Node indices inside the closed ball, and level indices inside the slab.
inline std::vector<std::size_t> nodes_in_ball(const Grid& g, const Point& center, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (distance(g.position(i), center, g.dim) <= r * (1.0 + 1e-12)) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> levels_in_slab(const Trajectory& traj, double t_lo, double t_hi) {
  std::vector<std::size_t> out;
  const double s = 1e-12 * std::max(1.0, std::abs(t_hi));
  for (std::size_t m = 0; m < traj.levels(); ++m)
    if (traj.times[m] >= t_lo - s && traj.times[m] <= t_hi + s) out.push_back(m);
  return out;
}

enum class Variable { temperature, beta };

/// max - min of the chosen variable over nodes and stored levels inside the cylinder.
inline double oscillation(const Trajectory& traj, const IntrinsicCylinder& cyl,
                          Variable var = Variable::temperature) {
  const auto nodes = nodes_in_ball(traj.grid(), cyl.center, cyl.r);
  const auto levels = levels_in_slab(traj, cyl.t_bottom(), cyl.t_top);
  if (nodes.size() < 2 || levels.size() < 2)
    throw EmptyCylinder("cylinder holds " + std::to_string(nodes.size()) + " nodes and " +
                        std::to_string(levels.size()) + " time levels; at least 2 of each are needed");
  double lo = infinity, hi = -infinity;
  const Beta& beta = traj.scenario.graph.beta();
  for (std::size_t m : levels)
    for (std::size_t i : nodes) {
      const double v = var == Variable::beta ? beta(traj.u[m][i]) : traj.u[m][i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi - lo;
}

/// The same solution in the frame y = x - x0, s = (t - t0) lambda^{p-2}, with
/// values divided by lambda. The graph is rescaled so the new trajectory solves
/// the rescaled equation with latent heat L_h / lambda.
inline Trajectory rescale_solution(const Trajectory& traj, double lambda, Point space_shift = {0.0, 0.0},
                                   double time_shift = 0.0) {
  if (!(lambda >= 1.0)) throw InvalidArgument("lambda must be >= 1");
  Trajectory out = traj;
  Scenario& s = out.scenario;
  const double tf = std::pow(lambda, s.p - 2.0);
  s.grid.origin = {s.grid.origin[0] - space_shift[0], s.grid.origin[1] - space_shift[1]};
  s.graph = traj.scenario.graph.rescaled(lambda);
  for (auto& side : s.boundary.sides)
    if (side) *side /= lambda;
  for (auto& t : out.times) t = (t - time_shift) * tf;
  for (auto& f : out.u)
    for (auto& v : f) v /= lambda;
  for (auto& f : out.e)
    for (auto& v : f) v /= lambda;
  for (auto& d : out.steps) {
    d.time = (d.time - time_shift) * tf;
    d.dt *= tf;
  }
  s.initial = {"field", {}, out.u.front()};
  s.t_end = out.times.back();
  s.sample_times.clear();
  return out;
}

struct ModulusFit {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  double residual = 0.0;
  /// Power-law fit osc = c r^gamma for comparison.
  double holder_exponent = 0.0;
  double holder_residual = 0.0;
  bool faster_than_log_power = false;
  std::size_t points = 0;
};

struct ProfilePoint {
  double r;
  double osc;
};

namespace detail {

struct LineFit {
  double intercept, slope, rms;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300)) throw InvalidArgument("degenerate design matrix: all abscissae coincide");
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - icpt - slope * x[i];
    ss += r * r;
  }
  return {icpt, slope, std::sqrt(ss / n)};
}

} // namespace detail

/// Least-squares fit of ln osc = ln c - alpha ln(p + ln(r0/r)). Points with
/// zero oscillation are dropped before fitting.
inline ModulusFit fit_modulus(const std::vector<ProfilePoint>& points, double p, double r0) {
  std::vector<double> x, y, lr;
  for (const auto& pt : points)
    if (pt.osc > 0.0 && pt.r > 0.0) {
      x.push_back(std::log(p + std::log(r0 / pt.r)));
      y.push_back(std::log(pt.osc));
      lr.push_back(std::log(pt.r));
    }
  if (x.size() < 4) throw InvalidArgument("fit needs at least 4 points with positive oscillation");
  const auto lp = detail::least_squares(x, y);
  const auto hf = detail::least_squares(lr, y);
  ModulusFit f;
  f.alpha_hat = -lp.slope;
  f.c_hat = std::exp(lp.intercept);
  f.residual = lp.rms;
  f.holder_exponent = hf.slope;
  f.holder_residual = hf.rms;
  f.faster_than_log_power = hf.slope > 0.0 && hf.rms < lp.rms;
  f.points = x.size();
  return f;
}

} // namespace stefanlab
