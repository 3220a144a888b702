#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace stefanlab {

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> gl8_nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> gl8_weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// Integral of f over [a, b] with the 8-point rule on `panels` equal panels.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 1) {
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * width;
    const double half = 0.5 * width;
    double panel = 0.0;
    for (std::size_t q = 0; q < gl8_nodes.size(); ++q)
      panel += gl8_weights[q] * f(mid + half * gl8_nodes[q]);
    sum += half * panel;
  }
  return sum;
}

} // namespace detail

/// Piecewise cubic Hermite interpolant on a uniform table of a nondecreasing
/// function. Endpoint slopes are limited (Fritsch-Carlson) so the interpolant
/// stays monotone.
class MonotoneTable {
public:
  MonotoneTable() = default;

  MonotoneTable(double lo, double hi, std::vector<double> values, const std::vector<double>& slopes)
      : lo_(lo), hi_(hi), values_(std::move(values)) {
    const std::size_t cells = values_.size() - 1;
    step_ = (hi_ - lo_) / static_cast<double>(cells);
    left_slope_.resize(cells);
    right_slope_.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
      const double secant = (values_[k + 1] - values_[k]) / step_;
      double m0 = slopes[k];
      double m1 = slopes[k + 1];
      if (secant <= 0.0) {
        m0 = m1 = 0.0;
      } else {
        const double a = m0 / secant;
        const double b = m1 / secant;
        const double norm = a * a + b * b;
        if (norm > 9.0) {
          const double tau = 3.0 / std::sqrt(norm);
          m0 = tau * a * secant;
          m1 = tau * b * secant;
        }
      }
      left_slope_[k] = m0;
      right_slope_[k] = m1;
    }
    prefix_.assign(cells + 1, 0.0);
    for (std::size_t k = 0; k < cells; ++k)
      prefix_[k + 1] = prefix_[k] + step_ * (0.5 * (values_[k] + values_[k + 1]) +
                                             step_ * (left_slope_[k] - right_slope_[k]) / 12.0);
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  /// Value at x, clamped to the table range.
  double operator()(double x) const {
    if (x <= lo_) return values_.front();
    if (x >= hi_) return values_.back();
    const double pos = (x - lo_) / step_;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= left_slope_.size()) k = left_slope_.size() - 1;
    const double s = pos - static_cast<double>(k);
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * values_[k] + (s3 - 2 * s2 + s) * step_ * left_slope_[k] +
           (-2 * s3 + 3 * s2) * values_[k + 1] + (s3 - s2) * step_ * right_slope_[k];
  }

  /// Exact integral of the interpolant from lo to x, extended by constants outside the range.
  double integral(double x) const {
    if (x <= lo_) return values_.front() * (x - lo_);
    if (x >= hi_) return prefix_.back() + values_.back() * (x - hi_);
    const double pos = (x - lo_) / step_;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= left_slope_.size()) k = left_slope_.size() - 1;
    const double s = pos - static_cast<double>(k);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return prefix_[k] + step_ * ((s - s3 + 0.5 * s4) * values_[k] +
                                 (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * step_ * left_slope_[k] +
                                 (s3 - 0.5 * s4) * values_[k + 1] + (0.25 * s4 - s3 / 3.0) * step_ * right_slope_[k]);
  }

private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  double step_ = 1.0;
  std::vector<double> prefix_;
  std::vector<double> values_;
  std::vector<double> left_slope_;
  std::vector<double> right_slope_;
};

/// The normalized bump exp(-1/(1-t^2)) on (-1, 1) and its cumulative
/// distribution. The CDF is tabulated once on [0, 1]; negative arguments use
/// the reflection cdf(-t) = 1 - cdf(t), so the symmetry holds by construction.
class Mollifier {
public:
  static constexpr std::size_t table_cells = 4096;

  static const Mollifier& standard() {
    static const Mollifier instance;
    return instance;
  }

  /// Unnormalized bump.
  static double bump(double t) {
    const double q = 1.0 - t * t;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
  }

  /// Normalization constant: integral of the bump over (-1, 1).
  double mass() const noexcept { return mass_; }

  /// Probability density, integrates to one over (-1, 1).
  double density(double t) const { return bump(t) / mass_; }

  /// Integral of the density from -1 to t.
  double cdf(double t) const {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (t < 0.0) return 1.0 - cdf_(-t);
    return cdf_(t);
  }

  /// Integral of cdf from -1 to t. The reflection makes the value at t = 1 exactly 1.
  double cdf_integral(double t) const {
    if (t <= -1.0) return 0.0;
    const double upper = cdf_.integral(1.0);
    if (t >= 1.0) return 1.0 + (t - 1.0);
    if (t < 0.0) return (t + 1.0) - (upper - cdf_.integral(-t));
    return 1.0 - upper + cdf_.integral(t);
  }

private:
  Mollifier() {
    const std::size_t n = table_cells;
    const double h = 1.0 / static_cast<double>(n);
    std::vector<double> partial(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = k * h;
      partial[k + 1] = partial[k] + detail::gauss_legendre(bump, a, a + h);
    }
    mass_ = 2.0 * partial[n];
    std::vector<double> values(n + 1);
    std::vector<double> slopes(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      values[k] = 0.5 + partial[k] / mass_;
      slopes[k] = bump(k * h) / mass_;
    }
    values[n] = 1.0;
    cdf_ = MonotoneTable(0.0, 1.0, std::move(values), slopes);
  }

  double mass_ = 0.0;
  MonotoneTable cdf_;
};

} // namespace stefanlab
