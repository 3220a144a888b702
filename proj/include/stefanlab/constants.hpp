#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace stefanlab {

enum class Provenance { formula, configured, measured };

inline std::string to_string(Provenance p) {
  switch (p) {
  case Provenance::formula: return "formula";
  case Provenance::configured: return "configured";
  case Provenance::measured: return "measured";
  }
  return "unknown";
}

struct LedgerEntry {
  double value = std::numeric_limits<double>::quiet_NaN();
  Provenance provenance = Provenance::configured;
  /// Free-form remark, e.g. why a formula value was adjusted.
  std::string note;
};

/// Structural data the constants depend on.
struct StructuralContext {
  int n = 1;
  double p = 2.0;
  double Lambda = 1.0;
  double alpha = 0.5;
  double kappa = infinity;

  static StructuralContext from(int n, double p, double Lambda, std::optional<double> alpha_choice = std::nullopt) {
    const auto ak = alpha_kappa_of(n, p, alpha_choice);
    return {n, p, Lambda, ak.alpha, ak.kappa};
  }
};

struct ConstantsLedger {
  StructuralContext context;
  LedgerEntry c0, c1, c2, c3;
  LedgerEntry eps1, M, theta1, theta2, theta, varsigma, nu_star, L, c_star;

  ModulusParams modulus(double r0) const {
    return {context.n, context.p, context.alpha, context.kappa, L.value, M.value, r0};
  }

  /// Every entry with its name, in a fixed order.
  std::vector<std::pair<std::string, const LedgerEntry*>> entries() const {
    return {{"c0", &c0},         {"c1", &c1},         {"c2", &c2},       {"c3", &c3},
            {"eps1", &eps1},     {"M", &M},           {"theta1", &theta1}, {"theta2", &theta2},
            {"theta", &theta},   {"varsigma", &varsigma}, {"nu_star", &nu_star}, {"L", &L},
            {"c_star", &c_star}};
  }
};

/// Derives eps1, M, theta and L from the structural constants. When c3 is not
/// given it is taken as max(2 c2, ln(2 c2)/c1).
inline ConstantsLedger fix_constants(const StructuralContext& ctx, double c0, double c1, double c2,
                                     std::optional<double> c3, double theta1, double theta2, double varsigma,
                                     double nu_star) {
  for (double v : {c0, c1, c2, theta1, theta2, varsigma, nu_star})
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("constants must be positive and finite");
  if (c3 && !(*c3 > 0.0 && std::isfinite(*c3))) throw InvalidArgument("c3 must be positive and finite");
  if (!(ctx.p >= 2.0)) throw InvalidArgument("p must be >= 2");
  if (!(ctx.Lambda >= 1.0)) throw InvalidArgument("Lambda must be >= 1");
  if (!(varsigma < 0.5)) throw InvalidArgument("varsigma must lie in (0, 1/2)");
  if (!(nu_star < 1.0)) throw InvalidArgument("nu_star must lie in (0, 1)");

  ConstantsLedger led;
  led.context = ctx;
  const auto cfg = [](double v) { return LedgerEntry{v, Provenance::configured, ""}; };
  led.c0 = cfg(c0);
  led.c1 = cfg(c1);
  led.c2 = cfg(c2);
  led.theta1 = cfg(theta1);
  led.theta2 = cfg(theta2);
  led.varsigma = cfg(varsigma);
  led.nu_star = cfg(nu_star);
  if (c3) led.c3 = cfg(*c3);
  else led.c3 = {std::max(2.0 * c2, std::log(2.0 * c2) / c1), Provenance::formula, ""};

  const double p = ctx.p;
  const double inv_kappa = std::isinf(ctx.kappa) ? 0.0 : 1.0 / ctx.kappa;
  double e1 = std::pow(c0, -1.0 / ((1.0 - inv_kappa) * (1.0 - inv_kappa)));
  if (p > 2.0) e1 = std::min(e1, std::pow(c1 / 16.0, 1.0 / (p - 2.0)));
  led.eps1 = {e1, Provenance::formula, p > 2.0 ? "" : "second branch inactive at p = 2"};

  const double m = 1.0 + std::pow(e1, 2.0 - p) * c1 / 16.0;
  led.M = {std::max(2.0, m), Provenance::formula, m < 2.0 ? "raised to the lower bound 2" : ""};

  const double th = std::min(theta1, theta2);
  led.theta = {th, Provenance::formula, ""};
  const double a = ctx.alpha;
  led.L = {std::max(std::pow(32.0 * a * std::log(32.0) / th, a), 2.0 * std::pow(p, a) * ctx.Lambda),
           Provenance::formula, ""};
  led.c_star = {std::numeric_limits<double>::quiet_NaN(), Provenance::measured, "not yet measured"};
  return led;
}

/// Lower bound lambda(t) on a positive supersolution, with the exponential
/// limit at p = 2.
inline double decay_profile(double k, double t, double t0, double R0, double c3, double p) {
  if (!(k > 0.0) || !(t >= t0) || !(R0 > 0.0) || !(c3 > 0.0) || !(p >= 2.0))
    throw InvalidArgument("decay profile needs k > 0, t >= t0, R0 > 0, c3 > 0, p >= 2");
  const double head = k / c3;
  if (p == 2.0) return head * std::exp(-c3 * (t - t0) / (R0 * R0));
  const double x = c3 * (p - 2.0) * std::pow(k, p - 2.0) * (t - t0) / std::pow(R0, p);
  return head * std::exp(-std::log1p(x) / (p - 2.0));
}

struct RTilde {
  /// ln(r0 / r_tilde); radius and c_tilde may under/overflow when this is large.
  double log_ratio;
  double radius;
  double c_tilde;
  /// Closed-form value of log_ratio, for comparison with the bisection.
  double log_ratio_closed_form;
};

/// The unique radius in (0, r0] where omega equals Lambda, by bisection in log-radius.
inline RTilde r_tilde_0(const ModulusParams& mp, double Lambda) {
  mp.validate();
  if (mp.omega_log(0.0) < Lambda) throw InvalidArgument("omega(r0) < Lambda: no radius with omega = Lambda");
  auto f = [&](double ell) { return mp.omega_log(ell) - Lambda; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InvalidArgument("radius ladder leaves the floating-point range");
  }
  if (f(0.0) == 0.0) hi = 0.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double ell = f(0.0) == 0.0 ? 0.0 : 0.5 * (lo + hi);
  return {ell, mp.r0 * std::exp(-ell), std::exp(ell), std::pow(mp.L / Lambda, 1.0 / mp.alpha) - mp.p};
}

struct InductionReport {
  int i_star = 0;
  int j = 0;
  /// (a) theta/32 omega(r_i)^{1/alpha} < 1 on the ladder up to j+1.
  bool factors_below_one = true;
  double max_factor = 0.0;
  /// (b) product over i*+1..j <= omega(r_j)/omega(r_i*), as a log-slack (>= 0 passes).
  bool product_bound = true;
  double product_slack = 0.0;
  /// The same product against omega(r_{j+1})/omega(r_{i*+1}), where each ladder
  /// term bounds the integral over the interval below it.
  bool product_bound_shifted = true;
  double product_slack_shifted = 0.0;
  /// omega(r_i*) * product <= 32 omega(r_{j+1}), the step the chain is used for.
  bool closure = true;
  double closure_slack = 0.0;
  /// (c) omega(r_j) <= 32 omega(r_{j+1}).
  bool doubling = true;
  double doubling_slack = 0.0;
  /// ln(1 - x) <= -x on every factor.
  bool log_bound = true;

  bool pass() const { return factors_below_one && product_bound && doubling && log_bound; }
  bool pass_shifted() const { return factors_below_one && product_bound_shifted && closure && doubling && log_bound; }
};

/// Evaluates the iteration chain on the ladder r_i = 32^{-i} r_tilde_0, all in log-radius.
inline InductionReport certify_induction(const ModulusParams& mp, const ConstantsLedger& ledger, int i_star, int j) {
  if (!(i_star >= 0 && i_star < j)) throw InvalidArgument("need 0 <= i_star < j");
  if (ledger.L.provenance != Provenance::formula) throw InvalidArgument("ledger L must be formula-derived");
  const RTilde rt = r_tilde_0(mp, ledger.context.Lambda);
  const double step = std::log(32.0);
  auto omega_i = [&](int i) { return mp.omega_log(rt.log_ratio + i * step); };
  if (!std::isfinite(rt.log_ratio + (j + 1) * step)) throw InvalidArgument("ladder leaves the floating-point range");

  const double th = ledger.theta.value;
  InductionReport rep;
  rep.i_star = i_star;
  rep.j = j;
  for (int i = 0; i <= j + 1; ++i) {
    const double x = th / 32.0 * std::pow(omega_i(i), 1.0 / mp.alpha);
    rep.max_factor = std::max(rep.max_factor, x);
  }
  rep.factors_below_one = rep.max_factor < 1.0;

  double log_prod = 0.0;
  for (int i = i_star + 1; i <= j; ++i) {
    const double x = th / 32.0 * std::pow(omega_i(i), 1.0 / mp.alpha);
    const double l = std::log1p(-x);
    if (!(l <= -x)) rep.log_bound = false;
    log_prod += l;
  }
  const double rel = 1e-14 * (1.0 + std::abs(log_prod));
  rep.product_slack = std::log(omega_i(j) / omega_i(i_star)) - log_prod;
  rep.product_bound = rep.product_slack >= -rel;
  rep.product_slack_shifted = std::log(omega_i(j + 1) / omega_i(i_star + 1)) - log_prod;
  rep.product_bound_shifted = rep.product_slack_shifted >= -rel;
  rep.closure_slack = std::log(32.0 * omega_i(j + 1)) - (std::log(omega_i(i_star)) + log_prod);
  rep.closure = rep.closure_slack >= -rel;
  rep.doubling_slack = std::log(32.0 * omega_i(j + 1) / omega_i(j));
  rep.doubling = rep.doubling_slack >= 0.0;
  return rep;
}

} // namespace stefanlab
