#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "constants.hpp"
#include "verify.hpp"

namespace stefanlab {

using json = nlohmann::ordered_json;

/// Lower-case hex SHA-256 of a byte string.
inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

/// Finite doubles as numbers, NaN and infinities as null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Shortest round-trip text for a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

inline json to_json(const InequalityReport& r) {
  json terms = json::object();
  for (const auto& [k, v] : r.terms) terms[k] = number(v);
  return {{"name", r.name},
          {"lhs", number(r.lhs)},
          {"rhs", number(r.rhs)},
          {"implied_constant", number(r.implied_constant)},
          {"margin", number(r.margin)},
          {"degenerate", r.degenerate},
          {"pass", r.pass},
          {"scenario_hash", r.scenario_hash},
          {"resolution", number(r.resolution)},
          {"terms", terms},
          {"note", r.note}};
}

inline json to_json(const AlternativeReport& a) {
  return {{"kind", to_string(a.kind)},   {"osc", number(a.osc)},           {"omega_r", number(a.omega_r)},
          {"fraction", number(a.fraction)}, {"threshold", number(a.threshold)}, {"time_slice", a.time_slice},
          {"b", number(a.b)},            {"reflected", a.reflected},       {"samples", a.samples}};
}

inline json to_json(const ModulusReport& m) {
  json rungs = json::array();
  for (const auto& r : m.rungs) {
    json j{{"r", number(r.r)},         {"depth", number(r.depth)}, {"osc", number(r.osc)},
           {"osc_beta", number(r.osc_beta)}, {"omega", number(r.omega)}, {"ratio", number(r.ratio)},
           {"empty", r.empty},          {"induction_invariant", r.induction_invariant}};
    j["alternative"] = r.alternative ? to_json(*r.alternative) : json(nullptr);
    rungs.push_back(j);
  }
  json fit = nullptr;
  if (m.fit)
    fit = {{"alpha_hat", number(m.fit->alpha_hat)},         {"c_hat", number(m.fit->c_hat)},
           {"residual", number(m.fit->residual)},           {"holder_exponent", number(m.fit->holder_exponent)},
           {"holder_residual", number(m.fit->holder_residual)}, {"faster_than_log_power", m.fit->faster_than_log_power},
           {"points", m.fit->points}};
  return {{"ladder", m.ladder},
          {"lambda", number(m.lambda)},
          {"c_star", number(m.c_star)},
          {"c_star_eps", number(m.c_star_eps)},
          {"eps_term", number(m.eps_term)},
          {"alpha", number(m.alpha)},
          {"oscillation_monotone", m.oscillation_monotone},
          {"induction_invariant", m.induction_invariant},
          {"fit", fit},
          {"pass", m.pass},
          {"note", m.note},
          {"rungs", rungs}};
}

inline json to_json(const EpsilonStudy& s) {
  auto arr = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
  };
  return {{"eps", arr(s.eps)},
          {"c_star", arr(s.c_star)},
          {"osc_fixed", arr(s.osc_fixed)},
          {"gaps", arr(s.gaps)},
          {"gaps_decreasing", s.gaps_decreasing},
          {"slope", number(s.slope)},
          {"intercept", number(s.intercept)},
          {"omega_fixed", number(s.omega_fixed)},
          {"intercept_consistent", s.intercept_consistent},
          {"degenerate", s.degenerate}};
}

inline json to_json(const ConstantsLedger& led) {
  json out = json::object();
  out["context"] = {{"n", led.context.n},
                    {"p", number(led.context.p)},
                    {"Lambda", number(led.context.Lambda)},
                    {"alpha", number(led.context.alpha)},
                    {"kappa", number(led.context.kappa)}};
  json entries = json::object();
  for (const auto& [name, e] : led.entries())
    entries[name] = {{"value", number(e->value)}, {"provenance", to_string(e->provenance)}, {"note", e->note}};
  out["entries"] = entries;
  return out;
}

/// Oscillation profile as CSV with columns r, T_r, osc, omega_r, ratio.
inline std::string oscillation_csv(const ModulusReport& m) {
  std::ostringstream out;
  out << "r,T_r,osc,omega_r,ratio\n";
  for (const auto& r : m.rungs) {
    if (r.empty) continue;
    out << format_double(r.r) << ',' << format_double(r.depth) << ',' << format_double(r.osc) << ','
        << format_double(r.omega) << ',' << format_double(r.ratio) << '\n';
  }
  return out.str();
}

/// Little-endian f64 dump of every stored level, row-major (level, y, x).
inline std::string trajectory_bytes(const Trajectory& traj) {
  std::string bytes;
  bytes.reserve(traj.levels() * traj.grid().size() * 8);
  for (const auto& f : traj.u)
    for (double v : f) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(v));
      for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
    }
  return bytes;
}

inline json snapshot_sidecar(const Trajectory& traj, const std::string& file, const std::string& sha) {
  const Grid& g = traj.grid();
  json times = json::array();
  for (double t : traj.times) times.push_back(t);
  return {{"file", file},
          {"format", "f64le"},
          {"layout", "level-major, then y, then x"},
          {"variable", "temperature"},
          {"dim", g.dim},
          {"nodes", g.dim == 2 ? json::array({g.nodes[0], g.nodes[1]}) : json::array({g.nodes[0]})},
          {"origin", g.dim == 2 ? json::array({g.origin[0], g.origin[1]}) : json::array({g.origin[0]})},
          {"extent", g.dim == 2 ? json::array({g.extent[0], g.extent[1]}) : json::array({g.extent[0]})},
          {"h", g.h},
          {"cell_centred", true},
          {"times", times},
          {"scenario_hash", traj.scenario_hash},
          {"sha256", sha}};
}

/// Reads back a snapshot written with trajectory_bytes.
inline std::vector<Field> read_snapshot(const std::filesystem::path& bin, std::size_t nodes) {
  const std::string bytes = read_file(bin);
  if (nodes == 0 || bytes.size() % (8 * nodes) != 0) throw Error("snapshot size does not match the grid");
  std::vector<Field> out(bytes.size() / (8 * nodes), Field(nodes));
  for (std::size_t k = 0; k < bytes.size() / 8; ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(bytes[8 * k + b])) << (8 * b);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    out[k / nodes][k % nodes] = v;
  }
  return out;
}

} // namespace stefanlab
