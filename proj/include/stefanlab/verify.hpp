#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "geometry.hpp"

namespace stefanlab {

/// Both sides of one estimate evaluated on a discrete solution. `rhs` is the
/// core of the right-hand side with the unknown multiplicative constant removed,
/// and `implied_constant` is the smallest constant making the estimate hold.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double implied_constant = 0.0;
  /// Slack of the pass rule of the check (>= 0 passes); NaN when there is none.
  double margin = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  bool pass = false;
  std::string scenario_hash;
  double resolution = 0.0;
  /// Individual terms and intermediate quantities, by name.
  std::map<std::string, double> terms;
  std::string note;
};

/// True when two implied constants agree within `factor`; two zeros agree.
inline bool stable_within(double a, double b, double factor = 2.0) {
  if (a == 0.0 && b == 0.0) return true;
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return false;
  const double r = a / b;
  return r >= 1.0 / factor && r <= factor;
}

namespace detail {

inline InequalityReport make_report(const std::string& name, const Trajectory& traj) {
  InequalityReport r;
  r.name = name;
  r.scenario_hash = traj.scenario_hash;
  r.resolution = traj.grid().h;
  return r;
}

/// lhs / rhs with 0/0 read as a degenerate pass and x/0 as infinite.
inline void set_ratio(InequalityReport& r) {
  if (r.rhs > 0.0) {
    r.implied_constant = r.lhs / r.rhs;
  } else if (r.lhs > 0.0) {
    r.implied_constant = infinity;
  } else {
    r.implied_constant = 0.0;
    r.degenerate = true;
    r.note = "degenerate, 0/0";
  }
}

/// Weight of level m inside (t_lo, t_hi] for right-endpoint quadrature.
inline double level_weight(const Trajectory& traj, std::size_t m, double t_lo) {
  if (m == 0) return 0.0;
  return traj.times[m] - std::max(traj.times[m - 1], t_lo);
}

inline void require_inside(const Grid& g, const Point& c, double r, const char* what) {
  const double s = 0.5 * g.h * (1.0 + 1e-9);
  for (int k = 0; k < g.dim; ++k)
    if (c[k] - r < g.lower()[k] - s || c[k] + r > g.upper()[k] + s)
      throw InvalidArgument(std::string(what) + " leaves the computational grid");
}

} // namespace detail

/// Tensor-product piecewise-linear cutoff on a cube B_R(c) times (t_lo, t_hi]:
/// equal to 1 on the inner cube of half-width inner_fraction * R, 0 on the
/// boundary of B_R, rising linearly in time from 0 at t_lo over ramp_fraction |Gamma|.
struct Cutoff {
  double inner_fraction = 0.5;
  double ramp_fraction = 0.5;
};

/// Space-time box for the energy estimate: the cube of half-width R around
/// `center` times (t_lo, t_hi].
struct EnergyCylinder {
  Point center{0.0, 0.0};
  double R = 0.25;
  double t_lo = 0.0;
  double t_hi = 0.1;
};

namespace detail {

struct CutoffValue {
  double phi;
  double grad_p;  ///< |D phi|^p
  double dt_phi_p; ///< (d/dt phi^p)_+
};

inline CutoffValue cutoff_at(const Cutoff& cut, const EnergyCylinder& cyl, const Point& x, double t, int dim,
                             double p) {
  const double rho = cut.inner_fraction * cyl.R;
  const double width = cyl.R - rho;
  std::array<double, 2> s{1.0, 1.0}, ds{0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    const double v = (cyl.R - std::abs(x[k] - cyl.center[k])) / width;
    s[k] = std::clamp(v, 0.0, 1.0);
    ds[k] = v > 0.0 && v < 1.0 ? 1.0 / width : 0.0;
  }
  const double psi = s[0] * s[1];
  double g2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double other = dim == 2 ? s[1 - k] : 1.0;
    g2 += ds[k] * other * ds[k] * other;
  }
  const double ramp = cut.ramp_fraction * (cyl.t_hi - cyl.t_lo);
  const double rel = (t - cyl.t_lo) / ramp;
  const double chi = std::clamp(rel, 0.0, 1.0);
  const double dchi = rel > 0.0 && rel <= 1.0 ? 1.0 / ramp : 0.0;
  return {psi * chi, std::pow(g2, 0.5 * p) * std::pow(chi, p),
          std::pow(psi, p) * p * std::pow(chi, p - 1.0) * dchi};
}

} // namespace detail

/// Energy estimate for v = beta(u), which solves the equation with jump at `b`
/// and latent heat `graph.latent_heat()`. Space averages count nodes of the
/// cube, time averages use right-endpoint weights on the stored levels.
inline InequalityReport caccioppoli_check(const Trajectory& traj, const RegularizedGraph& graph, double k,
                                          const Cutoff& cut, const EnergyCylinder& cyl) {
  if (!(cut.inner_fraction >= 0.0 && cut.inner_fraction < 1.0) || !(cut.ramp_fraction > 0.0 && cut.ramp_fraction <= 1.0))
    throw InvalidArgument("cutoff violates the boundary condition: need inner fraction in [0,1) and ramp in (0,1]");
  if (!(cyl.R > 0.0) || !(cyl.t_hi > cyl.t_lo)) throw InvalidArgument("energy cylinder must have positive size");
  const Grid& g = traj.grid();
  detail::require_inside(g, cyl.center, cyl.R, "energy cylinder");
  const double s = 1e-12 * std::max(1.0, std::abs(cyl.t_hi));
  if (cyl.t_lo < traj.times.front() - s || cyl.t_hi > traj.times.back() + s)
    throw InvalidArgument("energy cylinder leaves the computed time interval");

  std::vector<std::size_t> nodes;
  std::vector<char> inside(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (box_distance(g.position(i), cyl.center, g.dim) <= cyl.R * (1.0 + 1e-12)) {
      nodes.push_back(i);
      inside[i] = 1;
    }
  std::vector<std::size_t> levels;
  for (std::size_t m = 1; m < traj.levels(); ++m)
    if (traj.times[m] > cyl.t_lo + s && traj.times[m] <= cyl.t_hi + s) levels.push_back(m);
  if (nodes.size() < 2 || levels.empty()) throw EmptyCylinder("energy cylinder holds too few nodes or levels");

  const double p = traj.scenario.p;
  const double lh = graph.latent_heat();
  const double nb = static_cast<double>(nodes.size());
  const double gamma = cyl.t_hi - cyl.t_lo;
  double sup_jump = 0.0, sup_sq = 0.0, grad = 0.0, rhs_grad = 0.0, rhs_time = 0.0, rhs_jump = 0.0;
  const auto edges = g.edges();
  std::vector<double> f(g.size(), 0.0);
  for (std::size_t m : levels) {
    const double t = traj.times[m];
    const double wt = detail::level_weight(traj, m, cyl.t_lo) / gamma;
    const Field w = traj.beta_field(m);
    double jump = 0.0, sq = 0.0, rg = 0.0, rt = 0.0, rj = 0.0;
    for (std::size_t i : nodes) {
      const auto c = detail::cutoff_at(cut, cyl, g.position(i), t, g.dim, p);
      const double plus = std::max(w[i] - k, 0.0);
      const double J = lh > 0.0 ? enthalpy_jump_primitive(graph, graph.jump(), k, w[i]) : 0.0;
      const double php = std::pow(c.phi, p);
      jump += J * php;
      sq += plus * plus * php;
      rg += std::pow(plus, p) * c.grad_p;
      rt += plus * plus * c.dt_phi_p;
      rj += J * c.dt_phi_p;
      f[i] = plus * c.phi;
    }
    double gsum = 0.0;
    for (const auto& e : edges)
      if (inside[e.from] && inside[e.to]) gsum += std::pow(std::abs(f[e.to] - f[e.from]) / g.h, p);
    sup_jump = std::max(sup_jump, lh / gamma * jump / nb);
    sup_sq = std::max(sup_sq, sq / gamma / nb);
    grad += wt * gsum / nb;
    rhs_grad += wt * rg / nb;
    rhs_time += wt * rt / nb;
    rhs_jump += wt * lh * rj / nb;
  }

  auto rep = detail::make_report("caccioppoli", traj);
  rep.lhs = sup_jump + sup_sq + grad;
  rep.rhs = rhs_grad + rhs_time + rhs_jump;
  rep.terms = {{"lhs_jump_sup", sup_jump}, {"lhs_square_sup", sup_sq}, {"lhs_gradient", grad},
               {"rhs_gradient", rhs_grad}, {"rhs_time", rhs_time}, {"rhs_jump", rhs_jump},
               {"k", k}, {"nodes", nb}, {"levels", static_cast<double>(levels.size())}};
  detail::set_ratio(rep);
  rep.pass = std::isfinite(rep.implied_constant);
  return rep;
}

inline InequalityReport caccioppoli_check(const Trajectory& traj, double k, const Cutoff& cut,
                                          const EnergyCylinder& cyl) {
  return caccioppoli_check(traj, traj.scenario.graph, k, cut, cyl);
}

/// Axis-aligned region with a time window for the truncation check.
struct TruncationRegion {
  Point center{0.0, 0.0};
  double R = 0.25;
  double t_lo = 0.0;
  double t_hi = 0.1;
};

/// Supersolution test for min(k, v) with v = beta(u). The discrete defect
/// d = (z^m - z^{m-1}) - dt div q(min(beta^{-1}(k), u^m)) is paired with tent
/// functions psi(x) eta(t) on a lattice of centres, radii and time windows.
/// The minimal pairing must stay above -1e-8 times its natural scale; the
/// subsolution pairing for (k - v)_+ is its negative, since (k - v)_+ = k - min(k, v).
inline InequalityReport truncation_supersolution_check(const Trajectory& traj, const RegularizedGraph& graph,
                                                       double k, double b, double eps,
                                                       const TruncationRegion& region) {
  if (!(k < b - eps)) throw InvalidArgument("truncation level must satisfy k < b - eps");
  (void)graph;
  const Grid& g = traj.grid();
  const Scenario& sc = traj.scenario;
  detail::require_inside(g, region.center, region.R, "truncation region");
  if (!(region.t_hi > region.t_lo)) throw InvalidArgument("truncation window must have positive length");
  const double s = 1e-12 * std::max(1.0, std::abs(region.t_hi));
  if (region.t_lo < traj.times.front() - s || region.t_hi > traj.times.back() + s)
    throw InvalidArgument("truncation window leaves the computed time interval");
  std::vector<std::size_t> levels;
  for (std::size_t m = 1; m < traj.levels(); ++m)
    if (traj.times[m] > region.t_lo + s && traj.times[m] <= region.t_hi + s) levels.push_back(m);
  if (levels.empty()) throw EmptyCylinder("truncation window holds no time level");
  if (traj.steps.size() != traj.levels())
    throw InvalidArgument("truncation check needs every time step recorded");
  for (std::size_t m : levels)
    if (std::abs(traj.steps[m].dt - (traj.times[m] - traj.times[m - 1])) > 1e-12 * std::max(1.0, traj.times[m]))
      throw InvalidArgument("truncation check needs every time step recorded");

  const Beta& beta = sc.graph.beta();
  const double ku = beta.inverse(k);
  const double vol = g.cell_volume();
  const auto pinned = sc.boundary.pinned_values(g);
  double emax = 0.0;
  for (const auto& f : traj.e)
    for (double v : f) emax = std::max(emax, std::abs(v));

  // Defect and truncated flux per level.
  std::vector<Field> defect(levels.size(), Field(g.size(), 0.0));
  for (std::size_t a = 0; a < levels.size(); ++a) {
    const std::size_t m = levels[a];
    const double dt = traj.times[m] - traj.times[m - 1];
    Field uh(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) uh[i] = std::min(ku, traj.u[m][i]);
    const Field div = p_laplacian_apply(uh, sc.p, g, sc.vector_field);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double z1 = std::min(k, beta(traj.u[m][i])), z0 = std::min(k, beta(traj.u[m - 1][i]));
      defect[a][i] = (z1 - z0) - dt * div[i];
    }
  }

  // Lattice of tents: radii R/2 and R/4, centres spaced by half a radius,
  // windows covering the whole interval and its three thirds.
  double min_pair = infinity, worst_scale = 1.0, sum_scale = 0.0;
  int count = 0;
  const double span = region.t_hi - region.t_lo;
  std::vector<std::pair<double, double>> windows{{region.t_lo, region.t_hi}};
  for (int q = 0; q < 3; ++q) windows.push_back({region.t_lo + q * span / 3.0, region.t_lo + (q + 1) * span / 3.0});
  for (double frac : {0.5, 0.25}) {
    const double rad = frac * region.R;
    if (rad < 2.0 * g.h) continue;
    const int steps = static_cast<int>(std::floor((region.R - rad) / (0.5 * rad) + 1e-9));
    std::vector<double> offs;
    for (int q = -steps; q <= steps; ++q) offs.push_back(q * 0.5 * rad);
    const std::size_t ny = g.dim == 2 ? offs.size() : 1;
    for (std::size_t ix = 0; ix < offs.size(); ++ix)
      for (std::size_t iy = 0; iy < ny; ++iy) {
        const Point c{region.center[0] + offs[ix], g.dim == 2 ? region.center[1] + offs[iy] : 0.0};
        Field psi(g.size(), 0.0);
        bool touches_pinned = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const Point x = g.position(i);
          double v = 1.0;
          for (int kx = 0; kx < g.dim; ++kx) v *= std::max(0.0, 1.0 - std::abs(x[kx] - c[kx]) / rad);
          psi[i] = v;
          if (v > 0.0 && !std::isnan(pinned[i])) touches_pinned = true;
        }
        if (touches_pinned) continue;
        for (const auto& [wa, wb] : windows) {
          const double mid = 0.5 * (wa + wb), half = 0.5 * (wb - wa);
          double pair = 0.0, scale = 0.0;
          for (std::size_t a = 0; a < levels.size(); ++a) {
            const double eta = std::max(0.0, 1.0 - std::abs(traj.times[levels[a]] - mid) / half);
            if (eta == 0.0) continue;
            for (std::size_t i = 0; i < g.size(); ++i)
              if (psi[i] > 0.0) {
                pair += vol * eta * psi[i] * defect[a][i];
                scale += vol * eta * psi[i];
              }
          }
          if (scale == 0.0) continue;
          scale *= 1.0 + emax;
          ++count;
          sum_scale += scale;
          if (pair / scale < min_pair / worst_scale) {
            min_pair = pair;
            worst_scale = scale;
          }
        }
      }
  }
  if (count == 0) throw EmptyCylinder("no admissible test function fits the truncation region");

  auto rep = detail::make_report("truncation_supersolution", traj);
  const double tol = 1e-8 * worst_scale;
  rep.lhs = min_pair;
  rep.rhs = -tol;
  rep.implied_constant = min_pair / worst_scale;
  rep.margin = min_pair + tol;
  rep.pass = rep.margin >= 0.0;
  rep.terms = {{"min_supersolution_pairing", min_pair}, {"max_subsolution_pairing", -min_pair},
               {"scale", worst_scale}, {"tolerance", tol}, {"test_functions", static_cast<double>(count)},
               {"k", k}, {"b", b}, {"eps", eps}};
  return rep;
}

inline double ball_mean(const Field& v, const std::vector<std::size_t>& nodes) {
  double s = 0.0;
  for (std::size_t i : nodes) s += v[i];
  return s / static_cast<double>(nodes.size());
}

/// Weak Harnack inequality for the supersolution min(beta(u), k_truncation),
/// shifted up by its negative part over B_{4R0}(x0) x [0, T] when it dips below zero. Reports the
/// smallest c2 for which the estimate holds with the ledger's c1.
inline InequalityReport weak_harnack_check(const Trajectory& traj, double k_truncation, const Point& x0, double R0,
                                           double t1, double T, const ConstantsLedger& ledger) {
  const double p = traj.scenario.p;
  if (!(p > 2.0)) throw InvalidArgument("weak Harnack check requires p > 2");
  if (!(R0 > 0.0)) throw InvalidArgument("R0 must be positive");
  const Grid& g = traj.grid();
  detail::require_inside(g, x0, 4.0 * R0, "ball B_{4 R0}");
  const double s = 1e-12 * std::max(1.0, std::abs(T));
  if (!(t1 >= traj.times.front() && t1 < T)) throw InvalidArgument("need 0 <= t1 < T");
  if (T > traj.times.back() + s) throw InvalidArgument("waiting-time window exceeds the trajectory horizon");

  const auto big = nodes_in_ball(g, x0, 4.0 * R0);
  const auto b1 = nodes_in_ball(g, x0, R0);
  const auto b2 = nodes_in_ball(g, x0, 2.0 * R0);
  if (b1.empty()) throw EmptyCylinder("ball B_{R0} holds no node");
  const auto all = levels_in_slab(traj, traj.times.front(), T);
  std::vector<Field> v(traj.levels());
  double shift = 0.0;
  for (std::size_t m : all) {
    v[m] = traj.beta_field(m);
    for (auto& x : v[m]) x = std::min(x, k_truncation);
    for (std::size_t i : big) shift = std::min(shift, v[m][i]);
  }
  for (std::size_t m : all)
    for (auto& x : v[m]) x -= shift;

  // First stored level at or after t1.
  std::size_t m1 = all.back();
  for (std::size_t m : all)
    if (traj.times[m] >= t1 - s) {
      m1 = m;
      break;
    }
  const double ta = traj.times[m1];
  const double avg = ball_mean(v[m1], b1);
  const double c1 = ledger.c1.value;
  const double wait = avg > 0.0 ? c1 * std::pow(R0, p) * std::pow(avg, 2.0 - p) : infinity;
  const double tau = std::min(T - ta, wait);
  if (!(tau > 0.0)) throw InvalidArgument("waiting-time window is empty");
  const auto win = levels_in_slab(traj, ta + 0.5 * tau, ta + tau);
  if (win.empty()) throw EmptyCylinder("waiting-time window holds no stored level");
  double inf_q = infinity;
  for (std::size_t m : win)
    for (std::size_t i : b2) inf_q = std::min(inf_q, v[m][i]);
  const double first = 0.5 * std::pow(c1 * std::pow(R0, p) / (T - ta), 1.0 / (p - 2.0));

  auto rep = detail::make_report("weak_harnack", traj);
  rep.lhs = std::max(avg - first, 0.0);
  rep.rhs = inf_q;
  detail::set_ratio(rep);
  if (avg == 0.0) {
    rep.degenerate = true;
    rep.note = "degenerate, zero average";
  }
  rep.pass = std::isfinite(rep.implied_constant);
  rep.margin = first + ledger.c2.value * inf_q - avg;
  rep.terms = {{"average", avg}, {"first_term", first}, {"infimum", inf_q}, {"tau", tau}, {"t1", ta},
               {"shift", shift}, {"c1", c1}, {"c2_configured", ledger.c2.value}};
  return rep;
}

/// Decay of positivity for v = beta(u) on B_{2R0}(x0): the smallest c3 >= 1
/// with inf v(t) >= decay_profile(k, t, t0, R0, c3, p) on every stored level
/// in (t0, t0 + T].
inline InequalityReport decay_of_positivity_check(const Trajectory& traj, double k, const Point& x0, double R0,
                                                  double t0, double T, const ConstantsLedger& ledger) {
  if (!(k > 0.0) || !(R0 > 0.0) || !(T > 0.0)) throw InvalidArgument("need k > 0, R0 > 0 and T > 0");
  const Grid& g = traj.grid();
  detail::require_inside(g, x0, 2.0 * R0, "ball B_{2 R0}");
  const double p = traj.scenario.p;
  const auto nodes = nodes_in_ball(g, x0, 2.0 * R0);
  if (nodes.empty()) throw EmptyCylinder("ball B_{2 R0} holds no node");
  const double s = 1e-12 * std::max(1.0, std::abs(t0 + T));
  if (t0 + T > traj.times.back() + s) throw InvalidArgument("decay window exceeds the trajectory horizon");
  const auto lv = levels_in_slab(traj, t0, t0 + T);
  if (lv.empty() || std::abs(traj.times[lv.front()] - t0) > s) throw InvalidArgument("t0 must be a stored level");
  auto inf_at = [&](std::size_t m) {
    const Field w = traj.beta_field(m);
    double lo = infinity;
    for (std::size_t i : nodes) lo = std::min(lo, w[i]);
    return lo;
  };
  if (inf_at(lv.front()) < k) throw InvalidArgument("decay hypothesis fails: inf over B_{2 R0} at t0 is below k");

  std::vector<std::pair<double, double>> samples;
  for (std::size_t a = 1; a < lv.size(); ++a) samples.push_back({traj.times[lv[a]], inf_at(lv[a])});
  auto holds = [&](double c3) {
    for (const auto& [t, lo] : samples)
      if (lo < decay_profile(k, t, t0, R0, c3, p)) return false;
    return true;
  };
  double c3 = 1.0;
  if (!holds(1.0)) {
    double lo = 0.0, hi = std::log(1e12);
    if (!holds(std::exp(hi))) {
      c3 = infinity;
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (holds(std::exp(mid))) hi = mid;
        else lo = mid;
      }
      c3 = std::exp(hi);
    }
  }
  double min_inf = infinity;
  for (const auto& sm : samples) min_inf = std::min(min_inf, sm.second);

  auto rep = detail::make_report("decay_of_positivity", traj);
  rep.implied_constant = c3;
  rep.lhs = k;
  rep.rhs = samples.empty() ? k : min_inf;
  rep.pass = std::isfinite(c3);
  rep.margin = ledger.c3.value - c3;
  rep.terms = {{"k", k}, {"min_infimum", min_inf}, {"c3_ledger", ledger.c3.value},
               {"levels", static_cast<double>(samples.size())}};
  if (samples.empty()) {
    rep.degenerate = true;
    rep.note = "window holds only t0";
  }
  return rep;
}

enum class Alternative { trivial, first, second };

inline std::string to_string(Alternative a) {
  switch (a) {
  case Alternative::trivial: return "trivial";
  case Alternative::first: return "alt1";
  case Alternative::second: return "alt2";
  }
  return "unknown";
}

struct AlternativeReport {
  Alternative kind = Alternative::trivial;
  double osc = 0.0;
  double omega_r = 0.0;
  double fraction = 0.0;
  double threshold = 0.0;
  bool time_slice = false;
  /// Jump level relative to the infimum, and whether v was reflected to put it in the upper half.
  double b = 0.0;
  bool reflected = false;
  std::size_t samples = 0;
};

/// Classifies the enclosing cylinder Q_r (full flavour) into one of the two
/// alternatives by counting nodes of the lower cylinder B_{r/4} x [bottom, bottom + tilde_depth].
inline AlternativeReport alternative_classifier(const Trajectory& traj, const IntrinsicCylinder& enclosing,
                                                double tilde_depth, double omega_r, double eps1, double kappa) {
  if (!(omega_r > 0.0) || !(eps1 > 0.0) || !(tilde_depth > 0.0))
    throw InvalidArgument("classifier needs positive omega, eps1 and depth");
  const Grid& g = traj.grid();
  const auto nodes = nodes_in_ball(g, enclosing.center, enclosing.r);
  const auto levels = levels_in_slab(traj, enclosing.t_bottom(), enclosing.t_top);
  if (nodes.size() < 2 || levels.size() < 2) throw EmptyCylinder("enclosing cylinder holds too few samples");
  double lo = infinity, hi = -infinity;
  std::map<std::size_t, Field> w;
  for (std::size_t m : levels) {
    w[m] = traj.beta_field(m);
    for (std::size_t i : nodes) {
      lo = std::min(lo, w[m][i]);
      hi = std::max(hi, w[m][i]);
    }
  }
  AlternativeReport rep;
  rep.osc = hi - lo;
  rep.omega_r = omega_r;
  rep.b = traj.scenario.graph.jump() - lo;
  rep.threshold = eps1 * std::pow(omega_r, 1.0 + kappa_ratio(kappa));
  if (rep.osc < omega_r) return rep;
  rep.reflected = rep.b < 0.5 * rep.osc;

  const auto small = nodes_in_ball(g, enclosing.center, 0.25 * enclosing.r);
  const double tb = enclosing.t_bottom();
  std::size_t hits = 0, total = 0;
  for (std::size_t m : levels) {
    if (traj.times[m] > tb + tilde_depth * (1.0 + 1e-12)) continue;
    std::size_t h = 0;
    for (std::size_t i : small) {
      double v = w[m][i] - lo;
      if (rep.reflected) v = rep.osc - v;
      if (v >= 0.25 * rep.osc) ++h;
    }
    hits += h;
    total += small.size();
    if (!small.empty() && static_cast<double>(h) > rep.threshold * static_cast<double>(small.size()))
      rep.time_slice = true;
  }
  if (total == 0) throw EmptyCylinder("lower cylinder holds no sample");
  rep.samples = total;
  rep.fraction = static_cast<double>(hits) / static_cast<double>(total);
  rep.kind = rep.fraction > rep.threshold ? Alternative::first : Alternative::second;
  return rep;
}

/// Fraction of B_{r/16} x [t_bar, top] where v >= osc v - varsigma omega^{1+1/alpha},
/// with v = beta(u) - inf over the enclosing cylinder.
inline double log_lemma_fraction(const Trajectory& traj, const IntrinsicCylinder& enclosing, double t_bar,
                                 double omega_r, double varsigma, double alpha) {
  const Grid& g = traj.grid();
  const auto nodes = nodes_in_ball(g, enclosing.center, enclosing.r);
  const auto levels = levels_in_slab(traj, enclosing.t_bottom(), enclosing.t_top);
  if (nodes.size() < 2 || levels.size() < 2) throw EmptyCylinder("enclosing cylinder holds too few samples");
  double lo = infinity, hi = -infinity;
  for (std::size_t m : levels) {
    const Field w = traj.beta_field(m);
    for (std::size_t i : nodes) {
      lo = std::min(lo, w[i]);
      hi = std::max(hi, w[i]);
    }
  }
  const double level = (hi - lo) - varsigma * std::pow(omega_r, 1.0 + 1.0 / alpha);
  const auto small = nodes_in_ball(g, enclosing.center, enclosing.r / 16.0);
  std::size_t hits = 0, total = 0;
  for (std::size_t m : levels_in_slab(traj, t_bar, enclosing.t_top)) {
    const Field w = traj.beta_field(m);
    for (std::size_t i : small) hits += (w[i] - lo >= level) ? 1 : 0;
    total += small.size();
  }
  if (total == 0) throw EmptyCylinder("logarithmic-estimate cylinder holds no sample");
  return static_cast<double>(hits) / static_cast<double>(total);
}

struct LadderRung {
  double r = 0.0;
  double depth = 0.0;
  double osc = 0.0;
  double osc_beta = 0.0;
  double omega = 0.0;
  /// osc / (omega max{osc_domain, 1}).
  double ratio = 0.0;
  bool empty = false;
  /// Rescaled-frame invariant osc_beta / lambda <= 32 omega.
  bool induction_invariant = true;
  std::optional<AlternativeReport> alternative;
};

struct ModulusReport {
  std::vector<LadderRung> rungs;
  std::string ladder;  ///< "thirty-two" or "dyadic"
  double lambda = 1.0;
  double c_star = 0.0;
  /// Same, after subtracting the regularization term 2^8 Lambda eps.
  double c_star_eps = 0.0;
  double eps_term = 0.0;
  bool oscillation_monotone = true;
  bool induction_invariant = true;
  std::optional<ModulusFit> fit;
  double alpha = 0.0;
  bool pass = false;
  std::string note;
};

/// Radii of the acceptance ladder: 32^{-i} r_tilde_0 when at least four rungs
/// are resolvable (r >= 2h), otherwise halving from r0.
inline std::vector<double> acceptance_ladder(const ModulusParams& mp, double Lambda, double h, std::string* kind = nullptr,
                                             int max_rungs = 12) {
  std::vector<double> radii;
  const RTilde rt = r_tilde_0(mp, Lambda);
  for (int i = 0; i < 64 && static_cast<int>(radii.size()) < max_rungs; ++i) {
    const double ell = rt.log_ratio + i * std::log(32.0);
    const double r = mp.r0 * std::exp(-ell);
    if (r < 2.0 * h) break;
    radii.push_back(r);
  }
  if (radii.size() >= 4) {
    if (kind) *kind = "thirty-two";
    return radii;
  }
  radii.clear();
  for (double r = mp.r0; r >= 2.0 * h && static_cast<int>(radii.size()) < max_rungs; r *= 0.5) radii.push_back(r);
  if (kind) *kind = "dyadic";
  return radii;
}

/// Stopping times that put several stored levels inside every outer cylinder
/// of the ladder topped at t_top.
inline std::vector<double> ladder_sample_times(const ModulusParams& mp, double lambda, double t_top,
                                               const std::vector<double>& radii, int per_rung = 4) {
  std::vector<double> out;
  for (double r : radii) {
    const double d = time_depth(mp, r, CylinderFlavor::outer, lambda);
    for (int j = 1; j <= per_rung; ++j) {
      const double t = t_top - d * j / per_rung;
      if (t > 0.0) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// max{osc of the initial and boundary data, 1}, known before solving.
inline double data_normalization(const Scenario& sc) {
  const Field u = sc.initial_field();
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return std::max(*hi - *lo, 1.0);
}

/// max{osc of the data over the computed domain, 1}; the comparison principle
/// bounds the solution by its initial and boundary values.
inline double normalization(const Trajectory& traj) {
  double lo = infinity, hi = -infinity;
  for (const auto& f : traj.u)
    for (double v : f) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return std::max(hi - lo, 1.0);
}

/// Measures the oscillation on the outer intrinsic cylinders of the acceptance
/// ladder around (center, t_top) and reports the smallest c* with
/// osc <= c* omega(r) max{osc, 1} + 2^8 Lambda eps.
inline ModulusReport modulus_acceptance(const Trajectory& traj, const ModulusParams& mp, const ConstantsLedger& ledger,
                                        const Point& center, std::optional<double> t_top = std::nullopt,
                                        int max_rungs = 12) {
  mp.validate();
  const Grid& g = traj.grid();
  const double top = t_top.value_or(traj.times.back());
  ModulusReport rep;
  rep.lambda = normalization(traj);
  rep.alpha = mp.alpha;
  detail::require_inside(g, center, mp.r0, "outer cylinder");
  const double depth0 = time_depth(mp, mp.r0, CylinderFlavor::outer, rep.lambda);
  if (top - depth0 < traj.times.front() - 1e-12 * std::max(1.0, top) || top > traj.times.back() * (1 + 1e-12) + 1e-300)
    throw InvalidArgument("outer cylinder leaves the computed time interval");
  const double Lambda = ledger.context.Lambda;
  rep.eps_term = 256.0 * Lambda * traj.scenario.graph.eps();

  const auto radii = acceptance_ladder(mp, Lambda, g.h, &rep.ladder, max_rungs);
  const double eps1 = ledger.eps1.value;
  double prev = infinity;
  std::vector<ProfilePoint> pts;
  for (double r : radii) {
    LadderRung rung;
    rung.r = r;
    rung.omega = mp.omega(r);
    const auto cyl = cylinder(mp, center, top, r, CylinderFlavor::outer, rep.lambda);
    rung.depth = cyl.depth;
    try {
      rung.osc = oscillation(traj, cyl);
      rung.osc_beta = oscillation(traj, cyl, Variable::beta);
    } catch (const EmptyCylinder&) {
      rung.empty = true;
      rep.rungs.push_back(rung);
      continue;
    }
    rung.ratio = rung.osc / (rung.omega * rep.lambda);
    rung.induction_invariant = rung.osc_beta / rep.lambda <= 32.0 * rung.omega;
    rep.induction_invariant = rep.induction_invariant && rung.induction_invariant;
    if (rung.osc > prev * (1.0 + 1e-12)) rep.oscillation_monotone = false;
    prev = rung.osc;
    rep.c_star = std::max(rep.c_star, rung.ratio);
    rep.c_star_eps = std::max(rep.c_star_eps, std::max(rung.osc - rep.eps_term, 0.0) / (rung.omega * rep.lambda));
    const auto full = cylinder(mp, center, top, r, CylinderFlavor::full, rep.lambda);
    const double tilde = time_depth(mp, r, CylinderFlavor::tilde);
    try {
      rung.alternative = alternative_classifier(traj, full, std::min(tilde, full.depth), rung.omega, eps1,
                                                mp.kappa);
    } catch (const EmptyCylinder&) {
    }
    pts.push_back({r, rung.osc});
    rep.rungs.push_back(rung);
  }
  const std::size_t measured = pts.size();
  if (measured < 2) throw EmptyCylinder("fewer than two ladder rungs hold enough samples");
  try {
    rep.fit = fit_modulus(pts, mp.p, mp.r0);
  } catch (const InvalidArgument& e) {
    rep.note = std::string("no exponent fit: ") + e.what();
  }
  rep.pass = std::isfinite(rep.c_star) && rep.induction_invariant;
  return rep;
}

/// c* ratio between two resolutions within a factor 2.
inline bool modulus_stable(const ModulusReport& coarse, const ModulusReport& fine) {
  return stable_within(coarse.c_star, fine.c_star);
}

struct EpsilonStudy {
  std::vector<double> eps;
  std::vector<double> c_star;
  std::vector<double> osc_fixed;
  /// Max-norm distance between consecutive ladder levels on the interior cylinder.
  std::vector<double> gaps;
  bool gaps_decreasing = true;
  double slope = 0.0;
  double intercept = 0.0;
  double omega_fixed = 0.0;
  bool intercept_consistent = false;
  bool degenerate = false;
};

/// Runs the acceptance for each trajectory of a decreasing eps ladder on a
/// common grid, measures the oscillation at radius r_fixed, fits it linearly
/// against eps, and computes Cauchy gaps on `interior` at shared stored times.
inline EpsilonStudy epsilon_convergence_study(const std::vector<Trajectory>& family, const ModulusParams& mp,
                                              const ConstantsLedger& ledger, const Point& center, double r_fixed,
                                              const IntrinsicCylinder& interior) {
  if (family.empty()) throw InvalidArgument("eps study needs at least one trajectory");
  const double Lambda = ledger.context.Lambda;
  EpsilonStudy st;
  for (std::size_t a = 0; a < family.size(); ++a) {
    const auto& t = family[a];
    const double e = t.scenario.graph.eps();
    if (!(e >= 2.0 * t.grid().h * Lambda)) throw InvalidArgument("eps below the grid-resolvable width 2 h Lambda");
    if (a > 0 && !(e < st.eps.back())) throw InvalidArgument("eps ladder must be strictly decreasing");
    if (a > 0 && !(t.grid() == family[0].grid())) throw InvalidArgument("eps ladder must share one grid");
    st.eps.push_back(e);
    const auto rep = modulus_acceptance(t, mp, ledger, center);
    st.c_star.push_back(rep.c_star);
    st.osc_fixed.push_back(oscillation(t, cylinder(mp, center, t.times.back(), r_fixed, CylinderFlavor::outer,
                                                   rep.lambda)));
  }
  st.omega_fixed = mp.omega(r_fixed);
  if (family.size() == 1) {
    st.degenerate = true;
    return st;
  }
  const auto nodes = nodes_in_ball(family[0].grid(), interior.center, interior.r);
  for (std::size_t a = 0; a + 1 < family.size(); ++a) {
    const auto& A = family[a];
    const auto& B = family[a + 1];
    double gap = 0.0;
    std::size_t shared = 0;
    for (std::size_t m : levels_in_slab(A, interior.t_bottom(), interior.t_top)) {
      const double t = A.times[m];
      auto it = std::lower_bound(B.times.begin(), B.times.end(), t - 1e-12 * std::max(1.0, t));
      if (it == B.times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, t)) continue;
      const std::size_t mb = static_cast<std::size_t>(it - B.times.begin());
      for (std::size_t i : nodes) gap = std::max(gap, std::abs(A.u[m][i] - B.u[mb][i]));
      ++shared;
    }
    if (shared == 0) throw EmptyCylinder("eps ladder levels share no stored time on the interior cylinder");
    st.gaps.push_back(gap);
  }
  for (std::size_t a = 1; a < st.gaps.size(); ++a)
    if (!(st.gaps[a] < st.gaps[a - 1] || st.gaps[a] <= 1e-8)) st.gaps_decreasing = false;
  if (family.size() >= 2 && st.eps.front() > st.eps.back()) {
    const auto fit = detail::least_squares(st.eps, st.osc_fixed);
    st.slope = fit.slope;
    st.intercept = fit.intercept;
  }
  double cmax = 0.0;
  for (double c : st.c_star) cmax = std::max(cmax, c);
  const double lambda = normalization(family.back());
  st.intercept_consistent = st.intercept >= 0.0 && st.intercept <= cmax * st.omega_fixed * lambda * (1 + 1e-12);
  return st;
}

} // namespace stefanlab
