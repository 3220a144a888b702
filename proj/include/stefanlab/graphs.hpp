#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mollifier.hpp"

namespace stefanlab {

/// Bi-Lipschitz temperature map with beta(0) = 0, drawn from a closed family
/// whose Lipschitz constant is known in closed form.
class Beta {
public:
  enum class Kind { identity, piecewise_linear, tanh_perturbed };

  static Beta identity() { return Beta{}; }

  /// Continuous piecewise-linear map anchored at beta(0) = 0. `slopes` has one
  /// more entry than `breakpoints`; slope k applies left of breakpoint k.
  static Beta piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes) {
    if (slopes.size() != breakpoints.size() + 1)
      throw InvalidArgument("piecewise-linear beta needs one more slope than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
        std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end())
      throw InvalidArgument("piecewise-linear beta breakpoints must be strictly increasing");
    for (double s : slopes)
      if (!(s > 0.0) || !std::isfinite(s))
        throw InvalidArgument("piecewise-linear beta must be strictly increasing (all slopes > 0)");
    Beta b;
    b.kind_ = Kind::piecewise_linear;
    b.breaks_ = std::move(breakpoints);
    b.slopes_ = std::move(slopes);
    b.values_.resize(b.breaks_.size());
    for (std::size_t k = 0; k < b.breaks_.size(); ++k) b.values_[k] = b.pl_integrate_slope(b.breaks_[k]);
    for (double s : b.slopes_) b.lipschitz_ = std::max({b.lipschitz_, s, 1.0 / s});
    return b;
  }

  /// beta(u) = u + amplitude * tanh(rate * u) / rate, amplitude > -1, rate > 0.
  static Beta tanh_perturbed(double amplitude, double rate = 1.0) {
    if (!(amplitude > -1.0) || !std::isfinite(amplitude))
      throw InvalidArgument("tanh-perturbed beta needs amplitude > -1");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("tanh-perturbed beta needs rate > 0");
    Beta b;
    b.kind_ = Kind::tanh_perturbed;
    b.amplitude_ = amplitude;
    b.rate_ = rate;
    b.lipschitz_ = amplitude >= 0.0 ? 1.0 + amplitude : 1.0 / (1.0 + amplitude);
    return b;
  }

  Kind kind() const noexcept { return kind_; }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  double amplitude() const noexcept { return amplitude_; }
  double rate() const noexcept { return rate_; }

  std::string name() const {
    switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::piecewise_linear: return "piecewise_linear";
    case Kind::tanh_perturbed: return "tanh_perturbed";
    }
    return "unknown";
  }

  double operator()(double u) const {
    switch (kind_) {
    case Kind::identity: return u;
    case Kind::piecewise_linear: return pl_integrate_slope(u);
    case Kind::tanh_perturbed: return u + amplitude_ * std::tanh(rate_ * u) / rate_;
    }
    return u;
  }

  double derivative(double u) const {
    switch (kind_) {
    case Kind::identity: return 1.0;
    case Kind::piecewise_linear: return slopes_[segment_of(u)];
    case Kind::tanh_perturbed: {
      const double c = std::cosh(rate_ * u);
      return 1.0 + amplitude_ / (c * c);
    }
    }
    return 1.0;
  }

  double inverse(double w) const {
    switch (kind_) {
    case Kind::identity: return w;
    case Kind::piecewise_linear: {
      const std::size_t k = static_cast<std::size_t>(
          std::upper_bound(values_.begin(), values_.end(), w) - values_.begin());
      if (k == 0) return breaks_.empty() ? w / slopes_[0] : breaks_[0] + (w - values_[0]) / slopes_[0];
      return breaks_[k - 1] + (w - values_[k - 1]) / slopes_[k];
    }
    case Kind::tanh_perturbed: return tanh_inverse(w);
    }
    return w;
  }

  /// Integral of beta from 0 to u.
  double primitive(double u) const {
    switch (kind_) {
    case Kind::identity: return 0.5 * u * u;
    case Kind::piecewise_linear: {
      // beta is linear between consecutive knots, so the trapezoid rule is exact.
      double lo = std::min(0.0, u), hi = std::max(0.0, u);
      double sum = 0.0, a = lo;
      for (double knot : breaks_) {
        if (knot <= a) continue;
        if (knot >= hi) break;
        sum += 0.5 * ((*this)(a) + (*this)(knot)) * (knot - a);
        a = knot;
      }
      sum += 0.5 * ((*this)(a) + (*this)(hi)) * (hi - a);
      return u >= 0.0 ? sum : -sum;
    }
    case Kind::tanh_perturbed: {
      const double x = std::abs(rate_ * u);
      const double log_cosh = x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
      return 0.5 * u * u + amplitude_ * log_cosh / (rate_ * rate_);
    }
    }
    return 0.5 * u * u;
  }

  /// The map x -> beta(lambda x) / lambda, which has the same Lipschitz constant.
  Beta rescaled(double lambda) const {
    switch (kind_) {
    case Kind::identity: return *this;
    case Kind::piecewise_linear: {
      std::vector<double> knots = breaks_;
      for (double& k : knots) k /= lambda;
      return piecewise_linear(std::move(knots), slopes_);
    }
    case Kind::tanh_perturbed: return tanh_perturbed(amplitude_, rate_ * lambda);
    }
    return *this;
  }

private:
  std::size_t segment_of(double u) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), u) - breaks_.begin());
  }

  // Integral of the slope function from 0 to u.
  double pl_integrate_slope(double u) const {
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    double sum = 0.0, a = lo;
    std::size_t seg = segment_of(lo);
    for (std::size_t k = seg; k < breaks_.size() && breaks_[k] < hi; ++k) {
      sum += slopes_[k] * (breaks_[k] - a);
      a = breaks_[k];
      seg = k + 1;
    }
    sum += slopes_[seg] * (hi - a);
    return u >= 0.0 ? sum : -sum;
  }

  double tanh_inverse(double w) const {
    // |beta^{-1}(w)| <= Lambda |w| brackets the root; Newton with bisection safeguard.
    double lo = -lipschitz_ * std::abs(w) - 1e-300, hi = lipschitz_ * std::abs(w) + 1e-300;
    double x = w / (1.0 + std::max(amplitude_, 0.0) * 0.5);
    for (int it = 0; it < 200; ++it) {
      const double f = (*this)(x) - w;
      if (f == 0.0) return x;
      if (f > 0.0) hi = x; else lo = x;
      double next = x - f / derivative(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
      x = next;
    }
    return x;
  }

  Kind kind_ = Kind::identity;
  double lipschitz_ = 1.0;
  std::vector<double> breaks_;
  std::vector<double> slopes_{1.0};
  std::vector<double> values_;
  double amplitude_ = 0.0;
  double rate_ = 1.0;
};

/// The regularized enthalpy nonlinearity e(u) = beta(u) + L_h H_{a,eps}(beta(u)).
class RegularizedGraph {
public:
  static constexpr std::size_t jump_table_cells = 1024;

  RegularizedGraph() : RegularizedGraph(0.0, 1.0, 0.05, Beta::identity()) {}

  /// `latent_heat` may be 0 (no phase change); otherwise it lies in (0, 1].
  RegularizedGraph(double jump, double latent_heat, double eps, Beta beta = Beta::identity())
      : jump_(jump), latent_heat_(latent_heat), eps_(eps), beta_(std::move(beta)) {
    if (!std::isfinite(jump)) throw InvalidArgument("jump location must be finite");
    if (!(latent_heat >= 0.0 && latent_heat <= 1.0))
      throw InvalidArgument("latent heat must lie in [0, 1]");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("mollification width eps must be > 0");
    build_jump_table();
  }

  double jump() const noexcept { return jump_; }
  double latent_heat() const noexcept { return latent_heat_; }
  double eps() const noexcept { return eps_; }
  const Beta& beta() const noexcept { return beta_; }
  double lipschitz() const noexcept { return beta_.lipschitz(); }

  /// H_{a,eps}(s) in the beta-variable.
  double heaviside(double s) const { return heaviside_at(jump_, s); }
  double heaviside_derivative(double s) const { return heaviside_derivative_at(jump_, s); }

  /// H_{b,eps}(s) for an arbitrary centre b with this graph's width.
  double heaviside_at(double b, double s) const { return Mollifier::standard().cdf((s - b) / eps_); }
  double heaviside_derivative_at(double b, double s) const {
    return Mollifier::standard().density((s - b) / eps_) / eps_;
  }

  double enthalpy(double u) const {
    const double w = beta_(u);
    return w + latent_heat_ * heaviside(w);
  }

  double enthalpy_derivative(double u) const {
    const double w = beta_(u);
    return beta_.derivative(u) * (1.0 + latent_heat_ * heaviside_derivative(w));
  }

  /// Integral of the enthalpy from 0 to u; convex in u.
  double enthalpy_primitive(double u) const {
    return beta_.primitive(u) + latent_heat_ * (jump_integral(u) - jump_integral_at_zero_);
  }

  /// The same problem after u -> u / lambda: jump, width and latent heat divide by lambda.
  RegularizedGraph rescaled(double lambda) const {
    if (!(lambda >= 1.0)) throw InvalidArgument("rescaling factor must be >= 1");
    return RegularizedGraph(jump_ / lambda, latent_heat_ / lambda, eps_ / lambda, beta_.rescaled(lambda));
  }

private:
  // Integral of H(beta(s)) from s_lo_ to u, where H(beta(s_lo_)) starts to rise.
  double jump_integral(double u) const {
    if (u <= s_lo_) return 0.0;
    if (u >= s_hi_) return window_integral_.back() + (u - s_hi_);
    return window_integral_(u);
  }

  void build_jump_table() {
    s_lo_ = beta_.inverse(jump_ - eps_);
    s_hi_ = beta_.inverse(jump_ + eps_);
    const std::size_t n = jump_table_cells;
    const double h = (s_hi_ - s_lo_) / static_cast<double>(n);
    auto integrand = [this](double s) { return heaviside(beta_(s)); };
    std::vector<double> values(n + 1, 0.0), slopes(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = s_lo_ + k * h;
      values[k + 1] = values[k] + detail::gauss_legendre(integrand, a, a + h);
    }
    for (std::size_t k = 0; k <= n; ++k) slopes[k] = integrand(s_lo_ + k * h);
    window_integral_ = MonotoneTable(s_lo_, s_hi_, std::move(values), slopes);
    jump_integral_at_zero_ = jump_integral(0.0);
  }

  double jump_;
  double latent_heat_;
  double eps_;
  Beta beta_;
  double s_lo_ = 0.0;
  double s_hi_ = 0.0;
  MonotoneTable window_integral_;
  double jump_integral_at_zero_ = 0.0;
};

/// H_{a,eps}(s), the Heaviside graph convolved with the width-eps mollifier.
inline double mollified_heaviside(const RegularizedGraph& g, double s) { return g.heaviside(s); }

/// d/ds H_{a,eps}(s).
inline double mollified_heaviside_derivative(const RegularizedGraph& g, double s) {
  return g.heaviside_derivative(s);
}

/// s + Lh_eff * H_{b,eps}(s), the enthalpy of the translated and rescaled equation.
inline double enthalpy(const RegularizedGraph& g, double lh_eff, double b, double s) {
  if (!(lh_eff >= 0.0 && lh_eff <= 1.0)) throw InvalidArgument("effective latent heat must lie in [0, 1]");
  return s + lh_eff * g.heaviside_at(b, s);
}

/// Integral over xi in (k, v) of H'_{b,eps}(xi) (xi - k)_+. Integration by
/// parts reduces it to H and the integral of H, both read from the mollifier tables.
inline double enthalpy_jump_primitive(const RegularizedGraph& g, double b, double k, double v) {
  const double lo = std::max(k, b - g.eps());
  const double hi = std::min(v, b + g.eps());
  if (!(hi > lo)) return 0.0;
  const Mollifier& m = Mollifier::standard();
  const double tl = (lo - b) / g.eps(), th = (hi - b) / g.eps();
  const double boundary = (hi - k) * m.cdf(th) - (lo - k) * m.cdf(tl);
  const double bulk = g.eps() * (m.cdf_integral(th) - m.cdf_integral(tl));
  return std::max(0.0, boundary - bulk);
}

inline double beta_apply(const RegularizedGraph& g, double u) { return g.beta()(u); }
inline double beta_inverse(const RegularizedGraph& g, double w) { return g.beta().inverse(w); }

} // namespace stefanlab
