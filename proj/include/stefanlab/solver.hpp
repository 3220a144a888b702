#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "errors.hpp"
#include "graphs.hpp"
#include "grid.hpp"

namespace stefanlab {

/// Diffusion flux A(Du). The anisotropic variant weights each axis by its own
/// coefficient, A_k(xi) = c_k |xi_k|^{p-2} xi_k.
struct VectorField {
  enum class Kind { p_laplacian, anisotropic };

  Kind kind = Kind::p_laplacian;
  std::array<double, 2> weights{1.0, 1.0};

  static VectorField p_laplacian() { return {}; }
  static VectorField anisotropic(double cx, double cy) {
    if (!(cx > 0.0 && cy > 0.0)) throw InvalidArgument("anisotropic weights must be positive");
    return {Kind::anisotropic, {cx, cy}};
  }

  double weight(int axis) const noexcept { return kind == Kind::p_laplacian ? 1.0 : weights[axis]; }

  /// Smallest Lambda with |A(xi)| <= Lambda |xi|^{p-1} and <A(xi), xi> >= |xi|^p / Lambda.
  /// Per-face fluxes in 2D lose a factor 2^{(p-2)/2} in the ellipticity bound.
  double structure_constant(double p, int dim) const {
    double hi = weight(0), lo = weight(0);
    if (dim == 2) {
      hi = std::max(hi, weight(1));
      lo = std::min(lo, weight(1));
    }
    const double lost = dim == 2 ? std::pow(2.0, 0.5 * (p - 2.0)) : 1.0;
    return std::max({1.0, hi, lost / lo});
  }

  std::string name() const { return kind == Kind::p_laplacian ? "p_laplacian" : "anisotropic"; }
};

/// Boundary conditions per side: x-low, x-high, y-low, y-high. A side holding a
/// value is Dirichlet (its boundary cells are pinned); an empty side is zero-flux.
struct Boundary {
  std::array<std::optional<double>, 4> sides{};

  static Boundary zero_flux() { return {}; }
  static Boundary dirichlet(double x_low, double x_high) {
    Boundary b;
    b.sides[0] = x_low;
    b.sides[1] = x_high;
    return b;
  }

  bool is_zero_flux() const {
    return std::none_of(sides.begin(), sides.end(), [](const auto& s) { return s.has_value(); });
  }

  /// Pinned value per node (NaN for free nodes). Corners take the x-side value.
  std::vector<double> pinned_values(const Grid& g) const {
    std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
    const int nx = g.nodes[0], ny = g.dim == 2 ? g.nodes[1] : 1;
    if (g.dim == 2) {
      for (int i = 0; i < nx; ++i) {
        if (sides[2]) out[g.index(i, 0)] = *sides[2];
        if (sides[3]) out[g.index(i, ny - 1)] = *sides[3];
      }
    }
    for (int j = 0; j < ny; ++j) {
      if (sides[0]) out[g.index(0, j)] = *sides[0];
      if (sides[1]) out[g.index(nx - 1, j)] = *sides[1];
    }
    return out;
  }
};

/// Named initial datum. Positions are taken relative to the grid, with
/// xi in [0, 1] the normalized coordinate along each axis.
struct InitialData {
  std::string preset = "constant";
  std::map<std::string, double> params;
  Field values;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  static std::vector<std::string> preset_names() {
    return {"constant", "step", "bump", "cosine", "linear", "modes", "field"};
  }

  Field evaluate(const Grid& g) const {
    Field u(g.size(), 0.0);
    if (preset == "field") {
      if (values.size() != g.size()) throw InvalidArgument("initial field does not match the grid");
      return values;
    }
    std::vector<double> coef;
    if (preset == "modes") {
      const int m = static_cast<int>(param("modes", 4));
      if (m < 1) throw InvalidArgument("modes preset needs at least one mode");
      std::mt19937_64 rng(static_cast<std::uint64_t>(param("seed", 1)));
      for (int k = 0; k < 2 * m; ++k)
        coef.push_back(2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    }
    const double pi = std::acos(-1.0);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const Point x = g.position(idx);
      const double xi = (x[0] - g.origin[0]) / g.extent[0];
      const double eta = g.dim == 2 ? (x[1] - g.origin[1]) / g.extent[1] : 0.0;
      double v = 0.0;
      if (preset == "constant") {
        v = param("value", 0.0);
      } else if (preset == "step") {
        v = x[0] < param("position", g.origin[0] + 0.5 * g.extent[0]) ? param("left", 1.0) : param("right", 0.0);
      } else if (preset == "bump") {
        const Point c{param("center", g.origin[0] + 0.5 * g.extent[0]),
                      param("center_y", g.origin[1] + 0.5 * g.extent[1])};
        const double d = distance(x, c, g.dim) / param("width", 0.25);
        const double q = std::max(0.0, 1.0 - d * d);
        v = param("base", 0.0) + param("amplitude", 1.0) * q * q;
      } else if (preset == "cosine") {
        const double k = param("waves", 1.0);
        double s = std::cos(pi * k * xi);
        if (g.dim == 2) s *= std::cos(pi * k * eta);
        v = param("offset", 0.0) + param("amplitude", 1.0) * s;
      } else if (preset == "linear") {
        v = param("intercept", 0.0) + param("slope", 1.0) * x[0];
      } else if (preset == "modes") {
        const int m = static_cast<int>(coef.size() / 2);
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
          double term = std::cos(pi * (k + 1) * xi);
          if (g.dim == 2) term = coef[m + k] * std::cos(pi * (k + 1) * xi) + std::cos(pi * (k + 1) * eta);
          s += coef[k] * term;
        }
        v = param("base", 0.0) + param("amplitude", 1.0) * s / m;
      } else {
        throw InvalidArgument("unknown initial data preset '" + preset + "'");
      }
      u[idx] = v;
    }
    return u;
  }
};

struct TimeStepping {
  enum class Kind { fixed, intrinsic };

  Kind kind = Kind::fixed;
  double dt = 1e-3;
  /// Intrinsic policy: dt = factor * h^p * max(osc u, osc_floor)^{2-p}, clamped.
  double factor = 1.0;
  double osc_floor = 1e-3;
  double dt_min = 1e-9;
  double dt_max = 1.0;

  static TimeStepping fixed(double dt) {
    TimeStepping s;
    s.dt = dt;
    return s;
  }
  static TimeStepping intrinsic(double factor, double dt_min = 1e-9, double dt_max = 1.0) {
    TimeStepping s;
    s.kind = Kind::intrinsic;
    s.factor = factor;
    s.dt_min = dt_min;
    s.dt_max = dt_max;
    return s;
  }

  double next(const Field& u, double h, double p) const {
    if (kind == Kind::fixed) return dt;
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    const double osc = std::max(*hi - *lo, osc_floor);
    return std::clamp(factor * std::pow(h, p) * std::pow(osc, 2.0 - p), dt_min, dt_max);
  }
};

struct SolverTolerances {
  /// Step accepted once max |grad F| <= relative * (1 + max |e(u_old)|).
  double relative = 1e-10;
  int max_iterations = 200;
  /// Floor on the flux derivative inside the Newton matrix only.
  double sigma = 1e-12;
};

struct Scenario {
  Grid grid = Grid::line(64, 1.0);
  double p = 2.0;
  RegularizedGraph graph;
  VectorField vector_field;
  InitialData initial;
  Boundary boundary;
  double t_end = 0.1;
  TimeStepping stepping;
  SolverTolerances tolerances;
  /// Extra stopping times; each is hit exactly and recorded.
  std::vector<double> sample_times;
  /// Record every k-th accepted step (stopping times are always recorded).
  int record_every = 1;

  void validate() const {
    if (!(p >= 2.0) || !std::isfinite(p)) throw InvalidArgument("p must be >= 2");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be >= 0");
    if (stepping.kind == TimeStepping::Kind::fixed && !(stepping.dt > 0.0)) throw InvalidArgument("dt must be > 0");
    if (stepping.kind == TimeStepping::Kind::intrinsic && !(stepping.factor > 0.0 && stepping.dt_min > 0.0))
      throw InvalidArgument("intrinsic dt policy needs positive factor and dt_min");
    if (record_every < 1) throw InvalidArgument("record_every must be >= 1");
    if (grid.dim == 1 && (boundary.sides[2] || boundary.sides[3]))
      throw InvalidArgument("1D grid has no y boundary");
  }

  Field initial_field() const {
    Field u = initial.evaluate(grid);
    const auto pinned = boundary.pinned_values(grid);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!std::isnan(pinned[i])) u[i] = pinned[i];
    return u;
  }
};

struct StepDiagnostics {
  double time = 0.0;
  double dt = 0.0;
  int iterations = 0;
  int gradient_steps = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  /// F at u_old and at the accepted u_new (volume-normalized).
  double objective_old = 0.0;
  double objective_new = 0.0;
  /// True when every inner iterate lowered F up to roundoff.
  bool objective_monotone = true;
  /// (1/p) sum_edges c_k |du/h|^p at u_new.
  double dirichlet_energy = 0.0;
};

struct Trajectory {
  Scenario scenario;
  /// Hash of the resolved scenario, filled in by the pipeline.
  std::string scenario_hash;
  std::vector<double> times;
  std::vector<Field> u;
  std::vector<Field> e;
  std::vector<StepDiagnostics> steps;

  const Grid& grid() const noexcept { return scenario.grid; }
  std::size_t levels() const noexcept { return times.size(); }

  /// w = beta(u) at level m.
  Field beta_field(std::size_t m) const {
    Field w(u[m].size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scenario.graph.beta()(u[m][i]);
    return w;
  }
};

/// Discrete divergence of the face fluxes. Faces on the domain boundary carry
/// no flux, so the output sums to zero over the whole grid.
inline Field p_laplacian_apply(const Field& u, double p, const Grid& g, const VectorField& vf = {}) {
  if (u.size() != g.size()) throw InvalidArgument("field does not match the grid");
  if (!(p >= 2.0)) throw InvalidArgument("p must be >= 2");
  Field div(u.size(), 0.0);
  const double inv_h = 1.0 / g.h;
  for (const auto& edge : g.edges()) {
    const double grad = (u[edge.to] - u[edge.from]) * inv_h;
    const double q = vf.weight(edge.axis) * std::pow(std::abs(grad), p - 2.0) * grad;
    div[edge.from] += q * inv_h;
    div[edge.to] -= q * inv_h;
  }
  return div;
}

/// (1/p) sum over faces of c_k |du/h|^p.
inline double dirichlet_energy(const Field& u, double p, const Grid& g, const VectorField& vf = {}) {
  double sum = 0.0;
  for (const auto& edge : g.edges()) {
    const double grad = (u[edge.to] - u[edge.from]) / g.h;
    sum += vf.weight(edge.axis) * std::pow(std::abs(grad), p);
  }
  return sum / p;
}

namespace detail {

/// Solves one implicit step by minimizing
///   F(u) = sum_i [E(u_i) - e_old_i u_i] + dt * (1/p) sum_faces c_k |du/h|^p,
/// the step functional divided by the cell volume. Its gradient is the node
/// residual e(u) - e_old - dt div A(Du).
class StepSolver {
public:
  explicit StepSolver(const Scenario& s)
      : s_(s), edges_(s.grid.edges()), pinned_(s.boundary.pinned_values(s.grid)) {
    free_index_.assign(s.grid.size(), -1);
    for (std::size_t i = 0; i < pinned_.size(); ++i)
      if (std::isnan(pinned_[i])) {
        free_index_[i] = static_cast<int>(free_.size());
        free_.push_back(i);
      }
    const auto m = static_cast<Eigen::Index>(free_.size());
    hessian_.resize(m, m);
    std::vector<Eigen::Triplet<double>> pattern;
    for (Eigen::Index k = 0; k < m; ++k) pattern.emplace_back(k, k, 1.0);
    for (const auto& e : edges_) {
      const int a = free_index_[e.from], b = free_index_[e.to];
      if (a >= 0 && b >= 0) {
        pattern.emplace_back(a, b, 0.0);
        pattern.emplace_back(b, a, 0.0);
      }
    }
    hessian_.setFromTriplets(pattern.begin(), pattern.end());
    if (m > 0) ldlt_.analyzePattern(hessian_);
  }

  Field step(const Field& u_old, double dt, StepDiagnostics& diag) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
    for (double v : u_old)
      if (!std::isfinite(v)) throw SolverError(SolverError::Kind::nonfinite_value, "non-finite value in u_old");
    const std::size_t n = u_old.size();
    e_old_.resize(n);
    double e_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e_old_[i] = s_.graph.enthalpy(u_old[i]);
      e_scale = std::max(e_scale, std::abs(e_old_[i]));
    }
    dt_ = dt;
    const double tol = s_.tolerances.relative * (1.0 + e_scale);

    Field u = u_old;
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isnan(pinned_[i])) u[i] = pinned_[i];

    diag.dt = dt;
    diag.tolerance = tol;
    diag.objective_old = objective(u);
    diag.objective_monotone = true;
    double f = diag.objective_old;
    Field r = residual(u);
    double rnorm = free_norm(r);
    int it = 0;
    Eigen::VectorXd prev_step, prev_grad;
    while (rnorm > tol) {
      if (it >= s_.tolerances.max_iterations)
        throw SolverError(SolverError::Kind::max_iterations,
                          "implicit step did not reach the residual tolerance (residual " +
                              std::to_string(rnorm) + ", tolerance " + std::to_string(tol) + ")");
      ++it;
      Eigen::VectorXd g = gather(r);
      Eigen::VectorXd d;
      bool newton = newton_direction(u, g, d);
      Field trial;
      double f_trial = 0.0, r_trial_norm = 0.0;
      Field r_trial;
      bool accepted = newton && line_search(u, f, rnorm, g, d, trial, f_trial, r_trial, r_trial_norm);
      if (!accepted) {
        ++diag.gradient_steps;
        double alpha = 1.0;
        if (prev_step.size() == g.size()) {
          const Eigen::VectorXd y = g - prev_grad;
          const double sy = prev_step.dot(y);
          if (sy > 0.0) alpha = prev_step.squaredNorm() / sy;
        } else {
          alpha = 1.0 / max_diagonal(u);
        }
        d = -alpha * g;
        accepted = line_search(u, f, rnorm, g, d, trial, f_trial, r_trial, r_trial_norm);
        if (!accepted)
          throw SolverError(SolverError::Kind::max_iterations,
                            "line search failed to reduce the step functional");
      }
      if (f_trial > f + roundoff(f)) diag.objective_monotone = false;
      prev_step = gather(trial) - gather(u);
      prev_grad = g;
      u = std::move(trial);
      r = std::move(r_trial);
      f = f_trial;
      rnorm = r_trial_norm;
      for (std::size_t i : free_)
        if (!std::isfinite(u[i]))
          throw SolverError(SolverError::Kind::nonfinite_value, "non-finite value in implicit step");
    }
    diag.iterations = it;
    diag.residual = rnorm;
    diag.objective_new = f;
    diag.dirichlet_energy = dirichlet_energy(u, s_.p, s_.grid, s_.vector_field);
    return u;
  }

private:
  double objective(const Field& u) const {
    double bulk = 0.0;
    for (std::size_t i : free_) bulk += s_.graph.enthalpy_primitive(u[i]) - e_old_[i] * u[i];
    return bulk + dt_ * dirichlet_energy(u, s_.p, s_.grid, s_.vector_field);
  }

  double roundoff(double f) const { return 1e-12 * (1.0 + std::abs(f)); }

  Field residual(const Field& u) const {
    const Field div = p_laplacian_apply(u, s_.p, s_.grid, s_.vector_field);
    Field r(u.size(), 0.0);
    for (std::size_t i : free_) r[i] = s_.graph.enthalpy(u[i]) - e_old_[i] - dt_ * div[i];
    return r;
  }

  double free_norm(const Field& r) const {
    double m = 0.0;
    for (std::size_t i : free_) m = std::max(m, std::abs(r[i]));
    return m;
  }

  Eigen::VectorXd gather(const Field& v) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[free_[k]];
    return out;
  }

  double max_diagonal(const Field& u) const {
    Field diag(u.size(), 0.0);
    for (std::size_t i : free_) diag[i] = s_.graph.enthalpy_derivative(u[i]);
    const double inv_h2 = 1.0 / (s_.grid.h * s_.grid.h);
    for (const auto& e : edges_) {
      const double grad = (u[e.to] - u[e.from]) / s_.grid.h;
      const double w = dt_ * inv_h2 * (s_.p - 1.0) * s_.vector_field.weight(e.axis) *
                       std::max(std::pow(std::abs(grad), s_.p - 2.0), s_.tolerances.sigma);
      diag[e.from] += w;
      diag[e.to] += w;
    }
    double m = 0.0;
    for (std::size_t i : free_) m = std::max(m, diag[i]);
    return m > 0.0 ? m : 1.0;
  }

  bool newton_direction(const Field& u, const Eigen::VectorXd& g, Eigen::VectorXd& d) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(free_.size() + 4 * edges_.size());
    for (std::size_t k = 0; k < free_.size(); ++k)
      trips.emplace_back(k, k, s_.graph.enthalpy_derivative(u[free_[k]]));
    const double inv_h2 = 1.0 / (s_.grid.h * s_.grid.h);
    for (const auto& e : edges_) {
      const int a = free_index_[e.from], b = free_index_[e.to];
      if (a < 0 && b < 0) continue;
      const double grad = (u[e.to] - u[e.from]) / s_.grid.h;
      const double w = dt_ * inv_h2 * (s_.p - 1.0) * s_.vector_field.weight(e.axis) *
                       std::max(std::pow(std::abs(grad), s_.p - 2.0), s_.tolerances.sigma);
      if (a >= 0) trips.emplace_back(a, a, w);
      if (b >= 0) trips.emplace_back(b, b, w);
      if (a >= 0 && b >= 0) {
        trips.emplace_back(a, b, -w);
        trips.emplace_back(b, a, -w);
      }
    }
    hessian_.setFromTriplets(trips.begin(), trips.end());
    ldlt_.factorize(hessian_);
    if (ldlt_.info() != Eigen::Success) return false;
    d = -ldlt_.solve(g);
    if (ldlt_.info() != Eigen::Success || !d.allFinite()) return false;
    return g.dot(d) < 0.0;
  }

  // Backtracking on F with the Armijo condition. Near convergence F can no
  // longer resolve the decrease, so a step that keeps F within roundoff and
  // lowers the residual is also taken.
  bool line_search(const Field& u, double f, double rnorm, const Eigen::VectorXd& g, const Eigen::VectorXd& d,
                   Field& trial, double& f_trial, Field& r_trial, double& r_trial_norm) {
    const double slope = g.dot(d);
    double t = 1.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      trial = u;
      for (std::size_t j = 0; j < free_.size(); ++j) trial[free_[j]] += t * d[static_cast<Eigen::Index>(j)];
      f_trial = objective(trial);
      if (!std::isfinite(f_trial)) continue;
      const bool armijo = f_trial <= f + 1e-4 * t * slope;
      const bool flat = f_trial <= f + roundoff(f);
      if (!armijo && !flat) continue;
      r_trial = residual(trial);
      r_trial_norm = free_norm(r_trial);
      if (armijo || r_trial_norm < rnorm) return true;
    }
    return false;
  }

  const Scenario& s_;
  std::vector<Grid::Edge> edges_;
  std::vector<double> pinned_;
  std::vector<int> free_index_;
  std::vector<std::size_t> free_;
  Field e_old_;
  double dt_ = 0.0;
  Eigen::SparseMatrix<double> hessian_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

} // namespace detail

/// One backward-Euler step e(u_new) - dt div A(Du_new) = e(u_old).
inline Field implicit_step(const Field& u_old, double dt, const Scenario& scenario,
                           StepDiagnostics* diagnostics = nullptr) {
  scenario.validate();
  if (u_old.size() != scenario.grid.size()) throw InvalidArgument("field does not match the grid");
  detail::StepSolver solver(scenario);
  StepDiagnostics local;
  Field out = solver.step(u_old, dt, diagnostics ? *diagnostics : local);
  return out;
}

/// Evolves the scenario to t_end, recording the initial state, every
/// `record_every`-th step, every sample time and the final state.
inline Trajectory run_simulation(const Scenario& scenario) {
  scenario.validate();
  Trajectory traj;
  traj.scenario = scenario;
  Field u = scenario.initial_field();
  auto enthalpy_of = [&](const Field& v) {
    Field e(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) e[i] = scenario.graph.enthalpy(v[i]);
    return e;
  };
  traj.times.push_back(0.0);
  traj.u.push_back(u);
  traj.e.push_back(enthalpy_of(u));
  StepDiagnostics initial;
  initial.dirichlet_energy = dirichlet_energy(u, scenario.p, scenario.grid, scenario.vector_field);
  traj.steps.push_back(initial);
  if (scenario.t_end <= 0.0) return traj;

  std::vector<double> stops;
  for (double t : scenario.sample_times)
    if (t > 0.0 && t < scenario.t_end) stops.push_back(t);
  stops.push_back(scenario.t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  detail::StepSolver solver(traj.scenario);
  double t = 0.0;
  std::size_t next_stop = 0;
  long step_count = 0;
  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    double dt = scenario.stepping.next(u, scenario.grid.h, scenario.p);
    bool at_stop = false;
    if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - t;
      at_stop = true;
    } else if (t + 1.5 * dt > target) {
      dt = 0.5 * (target - t);
    }
    StepDiagnostics diag;
    try {
      u = solver.step(u, dt, diag);
    } catch (const SolverError& err) {
      throw SolverError(err.kind(), err.what(), t + dt);
    }
    t = at_stop ? target : t + dt;
    diag.time = t;
    ++step_count;
    if (at_stop) ++next_stop;
    if (at_stop || step_count % scenario.record_every == 0) {
      traj.times.push_back(t);
      traj.u.push_back(u);
      traj.e.push_back(enthalpy_of(u));
      traj.steps.push_back(diag);
    }
  }
  return traj;
}

} // namespace stefanlab
