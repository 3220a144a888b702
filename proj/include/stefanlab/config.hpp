#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "constants.hpp"
#include "io.hpp"

namespace stefanlab {

struct ModulusSpec {
  double r0 = 0.25;
  std::optional<Point> center;
  /// Exponent choice, required when p equals the dimension.
  std::optional<double> alpha;
  std::optional<double> L;
  std::optional<double> M;
  int ladder_depth = 12;
};

struct ConstantsSpec {
  /// Defaults to the structure constant of the flux and temperature map.
  std::optional<double> Lambda;
  double c0 = 2.0, c1 = 2.0, c2 = 2.0;
  std::optional<double> c3;
  double theta1 = 0.1, theta2 = 0.1;
  double varsigma = 0.25, nu_star = 0.5;
};

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"conservation", "caccioppoli",  "truncation",
                                              "weak_harnack", "decay", "modulus"};
  return names;
}

struct RunConfig {
  std::string preset;
  Scenario scenario;
  /// t_end = max(t_end, 1.25 times the outer depth at r0) when set.
  bool t_end_auto = false;
  /// When set, dt = t_end / steps once t_end is resolved.
  std::optional<int> steps;
  ModulusSpec modulus;
  ConstantsSpec constants;
  std::vector<std::string> checks = check_names();
  std::string output = "out";
  std::uint64_t seed = 1;

  double Lambda() const {
    if (constants.Lambda) return *constants.Lambda;
    const double lip = scenario.graph.beta().lipschitz();
    return scenario.vector_field.structure_constant(scenario.p, scenario.grid.dim) * std::pow(lip, scenario.p);
  }

  ConstantsLedger ledger() const {
    const auto ctx = StructuralContext::from(scenario.grid.dim, scenario.p, Lambda(), modulus.alpha);
    auto led = fix_constants(ctx, constants.c0, constants.c1, constants.c2, constants.c3, constants.theta1,
                             constants.theta2, constants.varsigma, constants.nu_star);
    if (modulus.L) led.L = {*modulus.L, Provenance::configured, "override"};
    if (modulus.M) led.M = {*modulus.M, Provenance::configured, "override"};
    return led;
  }

  ModulusParams modulus_params() const { return ledger().modulus(modulus.r0); }

  Point center() const {
    if (modulus.center) return *modulus.center;
    const Grid& g = scenario.grid;
    return {g.origin[0] + 0.5 * g.extent[0], g.dim == 2 ? g.origin[1] + 0.5 * g.extent[1] : 0.0};
  }

  bool wants(const std::string& check) const {
    return std::find(checks.begin(), checks.end(), check) != checks.end();
  }

  /// Resolves t_end and dt; the result is what the pipeline runs.
  RunConfig resolved() const {
    RunConfig out = *this;
    if (t_end_auto) {
      const double depth = time_depth(modulus_params(), modulus.r0, CylinderFlavor::outer,
                                      data_normalization(scenario));
      out.scenario.t_end = std::max(scenario.t_end, 1.25 * depth);
      out.t_end_auto = false;
    }
    if (steps) {
      out.scenario.stepping.kind = TimeStepping::Kind::fixed;
      out.scenario.stepping.dt = out.scenario.t_end / *steps;
      out.steps.reset();
    }
    return out;
  }

  void validate() const {
    try {
      scenario.validate();
      ledger();
      scenario.initial.evaluate(scenario.grid);
    } catch (const InvalidArgument& e) {
      throw ConfigError("scenario", e.what());
    }
    if (!(modulus.r0 > 0.0)) throw ConfigError("modulus.r0", "r0 must be positive");
    if (modulus.ladder_depth < 1) throw ConfigError("modulus.ladder_depth", "ladder depth must be >= 1");
    if (steps && *steps < 1) throw ConfigError("time.steps", "steps must be >= 1");
    for (const auto& c : checks)
      if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
        throw ConfigError("run.checks", "unknown check '" + c + "'");
  }
};

namespace detail {

inline RunConfig base_preset(int n, double p, double jump, double lh, double eps) {
  RunConfig c;
  c.scenario.grid = Grid::line(n, 1.0);
  c.scenario.p = p;
  c.scenario.graph = RegularizedGraph(jump, lh, eps);
  c.scenario.t_end = 0.0;
  c.t_end_auto = true;
  c.steps = 100;
  return c;
}

} // namespace detail

inline std::vector<std::string> preset_names() {
  return {"constant",
          "heat-1d-smooth",
          "stefan-1d-neumann",
          "stefan-1d-p2-twophase",
          "stefan-1d-p3-twophase",
          "stefan-2d-p2-twophase",
          "stefan-2d-p3-twophase",
          "onephase-1d-p3-bump",
          "jump-free-1d-p2"};
}

inline std::string preset_description(const std::string& name) {
  static const std::map<std::string, std::string> d{
      {"constant", "constant data; every check is trivial"},
      {"heat-1d-smooth", "heat equation without latent heat, smooth cosine data"},
      {"stefan-1d-neumann", "melting of a solid at the jump temperature from a wall held at 1"},
      {"stefan-1d-p2-twophase", "two-phase data crossing the jump at the centre, p = 2"},
      {"stefan-1d-p3-twophase", "two-phase data crossing the jump at the centre, p = 3"},
      {"stefan-2d-p2-twophase", "two-phase data on the unit square, p = 2"},
      {"stefan-2d-p3-twophase", "two-phase data on the unit square, p = 3"},
      {"onephase-1d-p3-bump", "positive bump below the jump level, p = 3"},
      {"jump-free-1d-p2", "jump level outside the data range, p = 2"}};
  auto it = d.find(name);
  return it == d.end() ? "" : it->second;
}

inline RunConfig preset_config(const std::string& name) {
  RunConfig c;
  const InitialData twophase{"cosine", {{"offset", 0.0}, {"amplitude", 1.0}, {"waves", 3}}, {}};
  if (name == "constant") {
    c = detail::base_preset(64, 2.0, 0.0, 1.0, 0.05);
    c.scenario.initial = {"constant", {{"value", 0.5}}, {}};
    c.steps = 20;
  } else if (name == "heat-1d-smooth") {
    c = detail::base_preset(128, 2.0, 0.0, 0.0, 0.05);
    c.scenario.initial = {"cosine", {{"offset", 0.0}, {"amplitude", 1.0}, {"waves", 1}}, {}};
  } else if (name == "stefan-1d-neumann") {
    const int n = 400;
    const double h = 1.0 / (n - 0.5);
    c = detail::base_preset(n, 2.0, 0.0, 1.0, 0.005);
    c.scenario.grid = Grid::line(n, n * h, -0.5 * h);
    c.scenario.boundary.sides[0] = 1.0;
    c.scenario.initial = {"constant", {{"value", -0.005}}, {}};
    c.scenario.t_end = 0.1;
    c.t_end_auto = false;
    c.steps = 1000;
    c.modulus.r0 = 0.2;
  } else if (name == "stefan-1d-p2-twophase" || name == "stefan-1d-p3-twophase") {
    const double p = name == "stefan-1d-p2-twophase" ? 2.0 : 3.0;
    c = detail::base_preset(128, p, 0.0, 1.0, 0.05);
    c.scenario.initial = twophase;
    if (p == 3.0) c.scenario.t_end = 0.02;
  } else if (name == "stefan-2d-p2-twophase" || name == "stefan-2d-p3-twophase") {
    const double p = name == "stefan-2d-p2-twophase" ? 2.0 : 3.0;
    c = detail::base_preset(3, p, 0.0, 1.0, 0.1);
    c.scenario.grid = Grid::rectangle(40, 40, 1.0, 1.0);
    c.scenario.initial = twophase;
    c.steps = 50;
    if (p == 2.0) c.modulus.alpha = 0.45;
    if (p == 3.0) c.scenario.t_end = 0.02;
  } else if (name == "onephase-1d-p3-bump") {
    c = detail::base_preset(128, 3.0, 2.0, 1.0, 0.05);
    c.scenario.initial = {"bump", {{"center", 0.5}, {"width", 0.3}, {"base", 0.05}, {"amplitude", 1.0}}, {}};
    c.scenario.t_end = 0.2;
    c.steps = 200;
  } else if (name == "jump-free-1d-p2") {
    c = detail::base_preset(128, 2.0, 5.0, 1.0, 0.05);
    c.scenario.initial = twophase;
  } else {
    throw ConfigError("run.preset", "unknown preset '" + name + "'");
  }
  c.preset = name;
  return c;
}

namespace detail {

inline double parse_number(const std::string& field, const std::string& text) {
  std::istringstream in(text);
  double v;
  in >> v;
  std::string rest;
  if (!in || (in >> rest)) throw ConfigError(field, "expected a number, got '" + text + "'");
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<double> parse_numbers(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_number(field, s));
  return out;
}

inline int parse_int(const std::string& field, const std::string& text) {
  const double v = parse_number(field, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(field, "expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"preset", "checks", "output", "seed"}},
      {"grid", {"dim", "nodes", "extent", "origin"}},
      {"equation",
       {"p", "jump", "latent_heat", "eps", "beta", "beta_breakpoints", "beta_slopes", "beta_amplitude", "beta_rate",
        "vector_field", "weights"}},
      {"initial", {"preset", "value", "left", "right", "position", "center", "center_y", "width", "base",
                   "amplitude", "offset", "waves", "intercept", "slope", "modes", "seed"}},
      {"boundary", {"x_low", "x_high", "y_low", "y_high"}},
      {"time", {"t_end", "steps", "stepping", "dt", "factor", "osc_floor", "dt_min", "dt_max", "record_every",
                "sample_times"}},
      {"solver", {"relative", "max_iterations", "sigma"}},
      {"modulus", {"r0", "center", "alpha", "L", "M", "ladder_depth"}},
      {"constants", {"Lambda", "c0", "c1", "c2", "c3", "theta1", "theta2", "varsigma", "nu_star"}}};
  return keys;
}

} // namespace detail

/// Parses a sectioned key-value configuration. A [run] preset supplies every
/// default; without one, grid.nodes, equation.p and time.t_end are required.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("file", std::string("malformed configuration: ") + e.message() + " at line " +
                                  std::to_string(e.line()));
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    auto it = detail::allowed_keys().find(section);
    if (it == detail::allowed_keys().end() || !body.data().empty())
      throw ConfigError(section, "unknown section or top-level key '" + section + "'");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key '" + section + "." + key + "'");
      kv[section + "." + key] = value.get_value<std::string>();
    }
  }
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto num = [&](const std::string& k) -> std::optional<double> {
    if (auto s = get(k)) return detail::parse_number(k, *s);
    return std::nullopt;
  };

  RunConfig c;
  const bool has_preset = get("run.preset").has_value();
  if (has_preset) c = preset_config(*get("run.preset"));
  else {
    for (const char* req : {"grid.nodes", "equation.p", "time.t_end"})
      if (!get(req)) throw ConfigError(req, std::string("missing required key '") + req + "'");
    c.steps.reset();
  }
  Scenario& s = c.scenario;

  if (auto v = get("run.checks")) {
    c.checks = detail::split_list(*v);
    if (c.checks.size() == 1 && c.checks[0] == "none") c.checks.clear();
  }
  if (auto v = get("run.output")) c.output = *v;
  if (auto v = num("run.seed")) {
    if (!(*v >= 0.0) || *v != std::floor(*v)) throw ConfigError("run.seed", "seed must be a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }

  // Grid.
  if (get("grid.dim") || get("grid.nodes") || get("grid.extent") || get("grid.origin")) {
    const int dim = get("grid.dim") ? detail::parse_int("grid.dim", *get("grid.dim")) : s.grid.dim;
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
    std::vector<double> nodes = get("grid.nodes") ? detail::parse_numbers("grid.nodes", *get("grid.nodes"))
                                                  : std::vector<double>{double(s.grid.nodes[0]), double(s.grid.nodes[1])};
    std::vector<double> ext = get("grid.extent") ? detail::parse_numbers("grid.extent", *get("grid.extent"))
                                                 : std::vector<double>{s.grid.extent[0], s.grid.extent[1]};
    std::vector<double> org = get("grid.origin") ? detail::parse_numbers("grid.origin", *get("grid.origin"))
                                                 : std::vector<double>{s.grid.origin[0], s.grid.origin[1]};
    auto pad = [&](std::vector<double>& v, const char* field) {
      if (v.empty()) throw ConfigError(field, "empty list");
      if (v.size() == 1) v.push_back(v[0]);
      if (v.size() != 2) throw ConfigError(field, "expected one or two values");
    };
    pad(nodes, "grid.nodes");
    pad(ext, "grid.extent");
    pad(org, "grid.origin");
    try {
      s.grid = dim == 1 ? Grid::line(static_cast<int>(nodes[0]), ext[0], org[0])
                        : Grid::rectangle(static_cast<int>(nodes[0]), static_cast<int>(nodes[1]), ext[0], ext[1],
                                          {org[0], org[1]});
    } catch (const InvalidArgument& e) {
      throw ConfigError("grid", e.what());
    }
  }

  // Equation.
  if (auto v = num("equation.p")) s.p = *v;
  {
    Beta beta = s.graph.beta();
    if (auto v = get("equation.beta")) {
      try {
        if (*v == "identity") beta = Beta::identity();
        else if (*v == "piecewise_linear")
          beta = Beta::piecewise_linear(detail::parse_numbers("equation.beta_breakpoints",
                                                              get("equation.beta_breakpoints").value_or("")),
                                        detail::parse_numbers("equation.beta_slopes",
                                                              get("equation.beta_slopes").value_or("")));
        else if (*v == "tanh_perturbed")
          beta = Beta::tanh_perturbed(num("equation.beta_amplitude").value_or(0.0),
                                      num("equation.beta_rate").value_or(1.0));
        else throw ConfigError("equation.beta", "unknown temperature map '" + *v + "'");
      } catch (const InvalidArgument& e) {
        throw ConfigError("equation.beta", e.what());
      }
    }
    try {
      s.graph = RegularizedGraph(num("equation.jump").value_or(s.graph.jump()),
                                 num("equation.latent_heat").value_or(s.graph.latent_heat()),
                                 num("equation.eps").value_or(s.graph.eps()), beta);
    } catch (const InvalidArgument& e) {
      throw ConfigError("equation", e.what());
    }
  }
  if (auto v = get("equation.vector_field")) {
    if (*v == "p_laplacian") s.vector_field = VectorField::p_laplacian();
    else if (*v == "anisotropic") {
      auto w = detail::parse_numbers("equation.weights", get("equation.weights").value_or("1, 1"));
      if (w.size() != 2) throw ConfigError("equation.weights", "expected two weights");
      try {
        s.vector_field = VectorField::anisotropic(w[0], w[1]);
      } catch (const InvalidArgument& e) {
        throw ConfigError("equation.weights", e.what());
      }
    } else throw ConfigError("equation.vector_field", "unknown vector field '" + *v + "'");
  }

  // Initial data.
  if (auto v = get("initial.preset")) {
    const auto names = InitialData::preset_names();
    if (*v == "field" || std::find(names.begin(), names.end(), *v) == names.end())
      throw ConfigError("initial.preset", "unknown initial data preset '" + *v + "'");
    s.initial = {*v, {}, {}};
  }
  for (const auto& [k, v] : kv)
    if (k.rfind("initial.", 0) == 0 && k != "initial.preset") s.initial.params[k.substr(8)] = detail::parse_number(k, v);
  if (s.initial.preset == "modes" && !s.initial.params.count("seed")) s.initial.params["seed"] = double(c.seed);

  // Boundary.
  const char* sides[4] = {"boundary.x_low", "boundary.x_high", "boundary.y_low", "boundary.y_high"};
  for (int k = 0; k < 4; ++k) {
    if (auto v = get(sides[k])) {
      if (*v == "zero_flux") s.boundary.sides[k].reset();
      else s.boundary.sides[k] = detail::parse_number(sides[k], *v);
    }
  }

  // Time.
  if (auto v = get("time.t_end")) {
    if (*v == "auto") c.t_end_auto = true;
    else {
      s.t_end = detail::parse_number("time.t_end", *v);
      c.t_end_auto = false;
    }
  }
  if (auto v = get("time.stepping")) {
    if (*v == "fixed") s.stepping.kind = TimeStepping::Kind::fixed;
    else if (*v == "intrinsic") s.stepping.kind = TimeStepping::Kind::intrinsic;
    else throw ConfigError("time.stepping", "stepping must be fixed or intrinsic");
    c.steps.reset();
  }
  if (auto v = num("time.dt")) {
    s.stepping.dt = *v;
    c.steps.reset();
  }
  if (auto v = get("time.steps")) c.steps = detail::parse_int("time.steps", *v);
  if (auto v = num("time.factor")) s.stepping.factor = *v;
  if (auto v = num("time.osc_floor")) s.stepping.osc_floor = *v;
  if (auto v = num("time.dt_min")) s.stepping.dt_min = *v;
  if (auto v = num("time.dt_max")) s.stepping.dt_max = *v;
  if (auto v = get("time.record_every")) s.record_every = detail::parse_int("time.record_every", *v);
  if (auto v = get("time.sample_times")) s.sample_times = detail::parse_numbers("time.sample_times", *v);
  if (!has_preset && !c.steps && !get("time.dt") && s.stepping.kind == TimeStepping::Kind::fixed)
    throw ConfigError("time.dt", "missing time step: give time.dt or time.steps");

  // Solver.
  if (auto v = num("solver.relative")) s.tolerances.relative = *v;
  if (auto v = get("solver.max_iterations")) s.tolerances.max_iterations = detail::parse_int("solver.max_iterations", *v);
  if (auto v = num("solver.sigma")) s.tolerances.sigma = *v;

  // Modulus and constants.
  if (auto v = num("modulus.r0")) c.modulus.r0 = *v;
  if (auto v = get("modulus.center")) {
    auto xs = detail::parse_numbers("modulus.center", *v);
    if (xs.empty() || xs.size() > 2) throw ConfigError("modulus.center", "expected one or two coordinates");
    c.modulus.center = Point{xs[0], xs.size() == 2 ? xs[1] : 0.0};
  }
  if (auto v = num("modulus.alpha")) c.modulus.alpha = *v;
  if (auto v = num("modulus.L")) c.modulus.L = *v;
  if (auto v = num("modulus.M")) c.modulus.M = *v;
  if (auto v = get("modulus.ladder_depth")) c.modulus.ladder_depth = detail::parse_int("modulus.ladder_depth", *v);
  if (auto v = num("constants.Lambda")) c.constants.Lambda = *v;
  if (auto v = num("constants.c0")) c.constants.c0 = *v;
  if (auto v = num("constants.c1")) c.constants.c1 = *v;
  if (auto v = num("constants.c2")) c.constants.c2 = *v;
  if (auto v = num("constants.c3")) c.constants.c3 = *v;
  if (auto v = num("constants.theta1")) c.constants.theta1 = *v;
  if (auto v = num("constants.theta2")) c.constants.theta2 = *v;
  if (auto v = num("constants.varsigma")) c.constants.varsigma = *v;
  if (auto v = num("constants.nu_star")) c.constants.nu_star = *v;

  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("file", e.what());
  }
  return parse_config(text);
}

/// Canonical text of a configuration; parsing it gives back the same run.
inline std::string to_ini(const RunConfig& c) {
  namespace pt = boost::property_tree;
  const Scenario& s = c.scenario;
  const Grid& g = s.grid;
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
    return out;
  };
  auto two = [&](double a, double b) { return g.dim == 2 ? list({a, b}) : format_double(a); };
  pt::ptree t;
  if (!c.preset.empty()) t.put("run.preset", c.preset);
  std::string checks;
  for (std::size_t i = 0; i < c.checks.size(); ++i) checks += (i ? ", " : "") + c.checks[i];
  t.put("run.checks", checks.empty() ? "none" : checks);
  t.put("run.output", c.output);
  t.put("run.seed", std::to_string(c.seed));
  t.put("grid.dim", std::to_string(g.dim));
  t.put("grid.nodes", g.dim == 2 ? std::to_string(g.nodes[0]) + ", " + std::to_string(g.nodes[1])
                                 : std::to_string(g.nodes[0]));
  t.put("grid.extent", two(g.extent[0], g.extent[1]));
  t.put("grid.origin", two(g.origin[0], g.origin[1]));
  t.put("equation.p", format_double(s.p));
  t.put("equation.jump", format_double(s.graph.jump()));
  t.put("equation.latent_heat", format_double(s.graph.latent_heat()));
  t.put("equation.eps", format_double(s.graph.eps()));
  const Beta& b = s.graph.beta();
  t.put("equation.beta", b.name());
  if (b.kind() == Beta::Kind::piecewise_linear) {
    t.put("equation.beta_breakpoints", list(b.breakpoints()));
    t.put("equation.beta_slopes", list(b.slopes()));
  }
  if (b.kind() == Beta::Kind::tanh_perturbed) {
    t.put("equation.beta_amplitude", format_double(b.amplitude()));
    t.put("equation.beta_rate", format_double(b.rate()));
  }
  t.put("equation.vector_field", s.vector_field.name());
  if (s.vector_field.kind == VectorField::Kind::anisotropic)
    t.put("equation.weights", list({s.vector_field.weights[0], s.vector_field.weights[1]}));
  t.put("initial.preset", s.initial.preset);
  for (const auto& [k, v] : s.initial.params) t.put("initial." + k, format_double(v));
  const char* sides[4] = {"boundary.x_low", "boundary.x_high", "boundary.y_low", "boundary.y_high"};
  for (int k = 0; k < (g.dim == 2 ? 4 : 2); ++k)
    t.put(sides[k], s.boundary.sides[k] ? format_double(*s.boundary.sides[k]) : std::string("zero_flux"));
  t.put("time.t_end", c.t_end_auto ? std::string("auto") : format_double(s.t_end));
  const bool fixed = s.stepping.kind == TimeStepping::Kind::fixed;
  t.put("time.stepping", fixed ? "fixed" : "intrinsic");
  if (c.steps) t.put("time.steps", std::to_string(*c.steps));
  else if (fixed) t.put("time.dt", format_double(s.stepping.dt));
  if (!fixed) {
    t.put("time.factor", format_double(s.stepping.factor));
    t.put("time.osc_floor", format_double(s.stepping.osc_floor));
    t.put("time.dt_min", format_double(s.stepping.dt_min));
    t.put("time.dt_max", format_double(s.stepping.dt_max));
  }
  t.put("time.record_every", std::to_string(s.record_every));
  if (!s.sample_times.empty()) t.put("time.sample_times", list(s.sample_times));
  t.put("solver.relative", format_double(s.tolerances.relative));
  t.put("solver.max_iterations", std::to_string(s.tolerances.max_iterations));
  t.put("solver.sigma", format_double(s.tolerances.sigma));
  t.put("modulus.r0", format_double(c.modulus.r0));
  const Point ctr = c.center();
  t.put("modulus.center", two(ctr[0], ctr[1]));
  if (c.modulus.alpha) t.put("modulus.alpha", format_double(*c.modulus.alpha));
  if (c.modulus.L) t.put("modulus.L", format_double(*c.modulus.L));
  if (c.modulus.M) t.put("modulus.M", format_double(*c.modulus.M));
  t.put("modulus.ladder_depth", std::to_string(c.modulus.ladder_depth));
  if (c.constants.Lambda) t.put("constants.Lambda", format_double(*c.constants.Lambda));
  t.put("constants.c0", format_double(c.constants.c0));
  t.put("constants.c1", format_double(c.constants.c1));
  t.put("constants.c2", format_double(c.constants.c2));
  if (c.constants.c3) t.put("constants.c3", format_double(*c.constants.c3));
  t.put("constants.theta1", format_double(c.constants.theta1));
  t.put("constants.theta2", format_double(c.constants.theta2));
  t.put("constants.varsigma", format_double(c.constants.varsigma));
  t.put("constants.nu_star", format_double(c.constants.nu_star));
  std::ostringstream out;
  pt::write_ini(out, t);
  return out.str();
}

} // namespace stefanlab
