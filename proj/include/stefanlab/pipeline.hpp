#pragma once

#include <filesystem>
#include <algorithm>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "verify.hpp"

namespace stefanlab {

enum ExitStatus : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2, exit_solver_failed = 3 };

/// Short description of the estimate each check exercises, carried into every summary.
inline std::string check_anchor(const std::string& check) {
  static const std::map<std::string, std::string> a{
      {"conservation", "enthalpy balance under zero-flux boundaries"},
      {"caccioppoli", "energy estimate for truncations above a level"},
      {"truncation", "truncation below the jump is a supersolution"},
      {"weak_harnack", "weak Harnack inequality for nonnegative supersolutions"},
      {"decay", "decay of positivity for supersolutions"},
      {"modulus", "logarithmic modulus of continuity on intrinsic cylinders"}};
  auto it = a.find(check);
  return it == a.end() ? "" : it->second;
}

struct CheckOutcome {
  std::string name;
  /// PASS, FAIL or SKIPPED.
  std::string status;
  double implied_constant = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

struct RunResult {
  int status = exit_ok;
  RunConfig config;
  Trajectory trajectory;
  ConstantsLedger ledger;
  std::vector<CheckOutcome> outcomes;
  std::vector<InequalityReport> reports;
  std::optional<ModulusReport> modulus;
};

/// Resolves the configuration and adds the stopping times the acceptance ladder needs.
inline RunConfig prepare(const RunConfig& cfg) {
  cfg.validate();
  RunConfig r = cfg.resolved();
  if (r.wants("modulus")) {
    const ModulusParams mp = r.modulus_params();
    const auto radii = acceptance_ladder(mp, r.ledger().context.Lambda, r.scenario.grid.h, nullptr,
                                         r.modulus.ladder_depth);
    auto extra = ladder_sample_times(mp, data_normalization(r.scenario), r.scenario.t_end, radii);
    auto& st = r.scenario.sample_times;
    st.insert(st.end(), extra.begin(), extra.end());
  }
  if (r.wants("weak_harnack") && r.scenario.p > 2.0) {
    // Any waiting window [tau/2, tau] inside (0, T] contains one of T 2^-j.
    for (int j = 1; j <= 40; ++j) r.scenario.sample_times.push_back(std::ldexp(r.scenario.t_end, -j));
  }
  auto& st = r.scenario.sample_times;
  std::sort(st.begin(), st.end());
  st.erase(std::unique(st.begin(), st.end()), st.end());
  return r;
}

/// SHA-256 of the canonical text of a prepared configuration, output directory excluded.
inline std::string scenario_hash(const RunConfig& prepared) {
  RunConfig c = prepared;
  c.output.clear();
  return sha256_hex(to_ini(c));
}

namespace detail {

inline std::pair<double, double> data_range(const Scenario& s) {
  const Field u = s.initial_field();
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return {*lo, *hi};
}

inline CheckOutcome outcome_of(const InequalityReport& r, const std::string& name) {
  return {name, r.pass ? "PASS" : "FAIL", r.implied_constant, r.note};
}

} // namespace detail

/// Runs one check on a solved trajectory with parameters derived from the configuration.
inline CheckOutcome run_check(const std::string& name, const RunConfig& cfg, const Trajectory& traj,
                              const ConstantsLedger& ledger, RunResult& out) {
  const Scenario& s = traj.scenario;
  const Grid& g = s.grid;
  const Point c = cfg.center();
  const double r0 = cfg.modulus.r0;
  const double t_end = traj.times.back();
  const auto [lo, hi] = detail::data_range(s);
  const RegularizedGraph& graph = s.graph;
  if (name == "conservation") {
    if (!s.boundary.is_zero_flux()) return {name, "SKIPPED", NAN, "Dirichlet boundary exchanges enthalpy"};
    const double vol = g.cell_volume();
    double e0 = 0.0, scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      e0 += traj.e[0][i] * vol;
      scale += std::abs(traj.e[0][i]) * vol;
    }
    for (const auto& e : traj.e) {
      double sum = 0.0;
      for (double v : e) sum += v * vol;
      worst = std::max(worst, std::abs(sum - e0));
    }
    InequalityReport r = detail::make_report("conservation", traj);
    r.lhs = worst;
    r.rhs = 1e-10 * std::max(1.0, scale);
    r.implied_constant = worst;
    r.margin = r.rhs - r.lhs;
    r.pass = r.margin >= 0.0;
    out.reports.push_back(r);
    return detail::outcome_of(r, name);
  }
  if (name == "caccioppoli") {
    double k = graph.latent_heat() > 0.0 ? graph.jump() : 0.5 * (lo + hi);
    if (!(k > lo && k < hi)) k = 0.5 * (lo + hi);
    const auto r = caccioppoli_check(traj, k, {}, EnergyCylinder{c, r0, 0.25 * t_end, t_end});
    out.reports.push_back(r);
    return detail::outcome_of(r, name);
  }
  if (name == "truncation") {
    const double top = graph.jump() - graph.eps();
    const double k = lo < top ? lo + 0.5 * (std::min(hi, top) - lo) : top - 0.5 * std::max(hi - lo, 1.0);
    const auto r = truncation_supersolution_check(traj, graph, k, graph.jump(), graph.eps(),
                                                  TruncationRegion{c, r0, 0.0, t_end});
    out.reports.push_back(r);
    return detail::outcome_of(r, name);
  }
  if (name == "weak_harnack") {
    if (!(s.p > 2.0)) return {name, "SKIPPED", NAN, "estimate requires p > 2"};
    const double k = graph.latent_heat() > 0.0 ? graph.jump() - graph.eps() : hi;
    const double R0 = 0.25 * r0;
    // Horizon at which the first term is about a quarter of the initial average.
    double shift = 0.0;
    for (std::size_t m = 0; m < traj.levels(); ++m) {
      const Field w = traj.beta_field(m);
      for (std::size_t i : nodes_in_ball(g, c, 4.0 * R0)) shift = std::min(shift, std::min(w[i], k));
    }
    const Field w0 = traj.beta_field(0);
    double avg = 0.0;
    const auto b1 = nodes_in_ball(g, c, R0);
    for (std::size_t i : b1) avg += std::min(w0[i], k) - shift;
    avg /= std::max<std::size_t>(b1.size(), 1);
    double T = t_end;
    if (avg > 0.0) T = std::min(t_end, ledger.c1.value * std::pow(R0, s.p) * std::pow(0.5 * avg, 2.0 - s.p));
    const auto r = weak_harnack_check(traj, k, c, R0, 0.0, T, ledger);
    out.reports.push_back(r);
    return detail::outcome_of(r, name);
  }
  if (name == "decay") {
    const Field w = traj.beta_field(0);
    double inf = infinity;
    for (std::size_t i : nodes_in_ball(g, c, 0.5 * r0)) inf = std::min(inf, w[i]);
    if (!(inf > 0.0)) return {name, "SKIPPED", NAN, "data not positive near the centre"};
    const auto r = decay_of_positivity_check(traj, inf, c, 0.25 * r0, 0.0, t_end, ledger);
    out.reports.push_back(r);
    return detail::outcome_of(r, name);
  }
  if (name == "modulus") {
    const auto m = modulus_acceptance(traj, ledger.modulus(r0), ledger, c, std::nullopt, cfg.modulus.ladder_depth);
    out.modulus = m;
    return {name, m.pass ? "PASS" : "FAIL", m.c_star, m.note};
  }
  throw ConfigError("run.checks", "unknown check '" + name + "'");
}

/// Solves the configured scenario and runs every requested check. Solver
/// failures propagate as SolverError; configuration problems as ConfigError.
inline RunResult execute(const RunConfig& cfg) {
  RunResult res;
  res.config = prepare(cfg);
  res.ledger = res.config.ledger();
  res.trajectory = run_simulation(res.config.scenario);
  res.trajectory.scenario_hash = scenario_hash(res.config);
  for (const auto& name : res.config.checks) {
    CheckOutcome o;
    try {
      o = run_check(name, res.config, res.trajectory, res.ledger, res);
    } catch (const ConfigError&) {
      throw;
    } catch (const SolverError&) {
      throw;
    } catch (const Error& e) {
      o = {name, "FAIL", NAN, e.what()};
    }
    res.outcomes.push_back(o);
    if (o.status == "FAIL") res.status = exit_check_failed;
  }
  if (res.modulus) res.ledger.c_star = {res.modulus->c_star, Provenance::measured, "acceptance ladder maximum"};
  return res;
}

inline json error_record(int status, const std::string& kind, const std::string& message,
                         const std::string& field = "", double time = -1.0) {
  json j{{"status", status}, {"kind", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  if (time >= 0.0) j["time"] = time;
  return j;
}

/// Writes every artifact of a finished run into `dir` and returns the summary.
inline json write_artifacts(const RunResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::string> files;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    files[name] = sha256_hex(bytes);
  };
  emit("resolved.ini", to_ini(res.config));
  const std::string traj = trajectory_bytes(res.trajectory);
  const std::string traj_sha = sha256_hex(traj);
  emit("trajectory.f64", traj);
  emit("trajectory.json", snapshot_sidecar(res.trajectory, "trajectory.f64", traj_sha).dump(2) + "\n");
  std::string lines;
  for (const auto& r : res.reports) lines += to_json(r).dump() + "\n";
  if (res.modulus) {
    json full{{"name", "modulus"}, {"scenario_hash", res.trajectory.scenario_hash}};
    const json m = to_json(*res.modulus);
    for (const auto& [k, v] : m.items()) full[k] = v;
    lines += full.dump() + "\n";
    emit("oscillation.csv", oscillation_csv(*res.modulus));
  }
  emit("reports.jsonl", lines);
  emit("ledger.json", to_json(res.ledger).dump(2) + "\n");

  json checks = json::array();
  for (const auto& o : res.outcomes)
    checks.push_back({{"name", o.name},
                      {"status", o.status},
                      {"anchor", check_anchor(o.name)},
                      {"implied_constant", number(o.implied_constant)},
                      {"message", o.message}});
  json hashes = json::object();
  for (const auto& [k, v] : files) hashes[k] = v;
  json summary{{"preset", res.config.preset},
               {"scenario_hash", res.trajectory.scenario_hash},
               {"status", res.status},
               {"result", res.status == exit_ok ? "PASS" : "FAIL"},
               {"levels", res.trajectory.levels()},
               {"t_end", res.trajectory.times.back()},
               {"checks", checks},
               {"files", hashes}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

/// One axis of a sweep: p, eps, resolution, latent_heat or preset.
struct SweepAxis {
  std::string name;
  std::vector<std::string> values;
};

inline SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("axis", "axis must look like name=v1,v2,...");
  SweepAxis a{spec.substr(0, eq), detail::split_list(spec.substr(eq + 1))};
  static const std::set<std::string> names{"p", "eps", "resolution", "latent_heat", "preset"};
  if (!names.count(a.name)) throw ConfigError("axis", "unknown sweep axis '" + a.name + "'");
  if (a.values.empty()) throw ConfigError("axis", "sweep axis '" + a.name + "' has no values");
  return a;
}

/// Applies one axis value to a configuration. Resolution values are node
/// counts along x; other axes keep their aspect ratio and the step count scales with it.
inline RunConfig apply_axis(const RunConfig& base, const std::string& axis, const std::string& value) {
  RunConfig c = base;
  const std::string field = "axis." + axis;
  if (axis == "preset") {
    RunConfig p = preset_config(value);
    p.checks = base.checks;
    p.output = base.output;
    p.seed = base.seed;
    return p;
  }
  const double v = detail::parse_number(field, value);
  Scenario& s = c.scenario;
  try {
    if (axis == "p") s.p = v;
    else if (axis == "eps") s.graph = RegularizedGraph(s.graph.jump(), s.graph.latent_heat(), v, s.graph.beta());
    else if (axis == "latent_heat") s.graph = RegularizedGraph(s.graph.jump(), v, s.graph.eps(), s.graph.beta());
    else if (axis == "resolution") {
      const int nx = static_cast<int>(v);
      const Grid& g = s.grid;
      const double ratio = double(nx) / g.nodes[0];
      if (g.dim == 1 && std::abs(g.origin[0] + 0.5 * g.h) < 1e-12 * g.extent[0]) {
        // Half-cell offset layout: keep the physical interval [0, extent - h/2].
        const double length = g.extent[0] + g.origin[0];
        const double h = length / (nx - 0.5);
        s.grid = Grid::line(nx, nx * h, -0.5 * h);
      } else if (g.dim == 1) {
        s.grid = Grid::line(nx, g.extent[0], g.origin[0]);
      } else {
        s.grid = Grid::rectangle(nx, static_cast<int>(std::lround(g.nodes[1] * ratio)), g.extent[0], g.extent[1],
                                 g.origin);
      }
      if (c.steps) c.steps = static_cast<int>(std::lround(*c.steps * ratio));
      else s.stepping.dt /= ratio;
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
  c.validate();
  return c;
}

struct SweepResult {
  int status = exit_ok;
  std::string csv;
  json eps_studies = json::array();
};

/// Runs the cross product of the axes, writing each run under `dir`/run_NNN,
/// the aggregated table to sweep.csv and, when an eps axis has several
/// values, the convergence study to eps_study.json.
inline SweepResult run_sweep(const RunConfig& base, std::vector<SweepAxis> axes, const std::filesystem::path& dir) {
  std::stable_partition(axes.begin(), axes.end(), [](const SweepAxis& a) { return a.name == "preset"; });
  std::vector<std::vector<std::size_t>> combos{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& c : combos)
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        auto d = c;
        d.push_back(i);
        next.push_back(d);
      }
    combos = next;
  }
  std::vector<RunConfig> configs;
  for (const auto& combo : combos) {
    RunConfig c = base;
    for (std::size_t k = 0; k < axes.size(); ++k) c = apply_axis(c, axes[k].name, axes[k].values[combo[k]]);
    configs.push_back(c);
  }

  auto axis_index = [&](const std::string& name) -> int {
    for (std::size_t k = 0; k < axes.size(); ++k)
      if (axes[k].name == name) return static_cast<int>(k);
    return -1;
  };
  const int res_axis = axis_index("resolution");
  const int eps_axis = axis_index("eps");
  auto key_without = [&](const std::vector<std::size_t>& combo, int skip) {
    std::string key;
    for (std::size_t k = 0; k < combo.size(); ++k)
      if (static_cast<int>(k) != skip) key += std::to_string(combo[k]) + ",";
    return key;
  };

  SweepResult out;
  std::vector<std::optional<RunResult>> results(combos.size());
  for (std::size_t r = 0; r < combos.size(); ++r) {
    std::ostringstream name;
    name << "run_" << std::setw(3) << std::setfill('0') << r;
    try {
      RunResult res = execute(configs[r]);
      write_artifacts(res, dir / name.str());
      out.status = std::max(out.status, res.status);
      results[r] = std::move(res);
    } catch (const SolverError& e) {
      write_file(dir / name.str() / "error.json",
                 error_record(exit_solver_failed, "solver", e.what(), "", e.time()).dump(2) + "\n");
      out.status = std::max<int>(out.status, exit_solver_failed);
    }
  }

  std::ostringstream csv;
  csv << "run,preset,p,eps,nodes,latent_heat,check,status,implied_constant,coarse_constant,stable\n";
  for (std::size_t r = 0; r < combos.size(); ++r) {
    const RunConfig& c = configs[r];
    const Scenario& s = c.scenario;
    std::ostringstream prefix;
    prefix << r << ',' << (c.preset.empty() ? "custom" : c.preset) << ',' << format_double(s.p) << ','
           << format_double(s.graph.eps()) << ',' << s.grid.nodes[0] << ',' << format_double(s.graph.latent_heat())
           << ',';
    if (!results[r]) {
      csv << prefix.str() << "solver,ERROR,,,\n";
      continue;
    }
    std::optional<std::size_t> coarse;
    if (res_axis >= 0 && combos[r][res_axis] > 0)
      for (std::size_t q = 0; q < combos.size(); ++q)
        if (combos[q][res_axis] + 1 == combos[r][res_axis] &&
            key_without(combos[q], res_axis) == key_without(combos[r], res_axis))
          coarse = q;
    for (const auto& o : results[r]->outcomes) {
      double prev = std::numeric_limits<double>::quiet_NaN();
      if (coarse && results[*coarse])
        for (const auto& po : results[*coarse]->outcomes)
          if (po.name == o.name) prev = po.implied_constant;
      std::string stable;
      if (std::isfinite(prev) && std::isfinite(o.implied_constant))
        stable = stable_within(o.implied_constant, prev) ? "yes" : "no";
      csv << prefix.str() << o.name << ',' << o.status << ','
          << (std::isfinite(o.implied_constant) ? format_double(o.implied_constant) : "") << ','
          << (std::isfinite(prev) ? format_double(prev) : "") << ',' << stable << '\n';
    }
  }
  out.csv = csv.str();
  write_file(dir / "sweep.csv", out.csv);

  if (eps_axis >= 0 && axes[eps_axis].values.size() >= 2) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < combos.size(); ++r) groups[key_without(combos[r], eps_axis)].push_back(r);
    for (const auto& [key, members] : groups) {
      std::vector<std::size_t> order = members;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return configs[a].scenario.graph.eps() > configs[b].scenario.graph.eps();
      });
      json entry{{"runs", json::array()}};
      for (std::size_t r : order) entry["runs"].push_back(r);
      std::vector<Trajectory> family;
      for (std::size_t r : order)
        if (results[r]) family.push_back(results[r]->trajectory);
      try {
        if (family.size() != order.size()) throw Error("a run in this group failed to solve");
        const RunResult& first = *results[order.front()];
        const double r0 = first.config.modulus.r0;
        const double t_top = family.front().times.back();
        const IntrinsicCylinder interior{first.config.center(), t_top, 0.5 * r0, t_top, CylinderFlavor::full};
        const auto st = epsilon_convergence_study(family, first.ledger.modulus(r0), first.ledger,
                                                  first.config.center(), 0.25 * r0, interior);
        entry["study"] = to_json(st);
      } catch (const Error& e) {
        entry["error"] = e.what();
      }
      out.eps_studies.push_back(entry);
    }
    write_file(dir / "eps_study.json", out.eps_studies.dump(2) + "\n");
  }
  return out;
}

} // namespace stefanlab
