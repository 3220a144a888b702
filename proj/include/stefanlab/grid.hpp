#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace stefanlab {

using Point = std::array<double, 2>;
using Field = std::vector<double>;

/// Uniform cell-centred grid on a 1D interval or 2D rectangle. Node i sits at
/// the centre of cell i, so the domain [origin, origin + extent] is tiled by
/// `nodes` cells of width h on every axis.
struct Grid {
  struct Edge {
    std::size_t from;
    std::size_t to;
    int axis;
  };

  int dim = 1;
  std::array<int, 2> nodes{3, 1};
  std::array<double, 2> extent{1.0, 0.0};
  std::array<double, 2> origin{0.0, 0.0};
  double h = 1.0 / 3.0;

  static Grid line(int n, double length, double origin_x = 0.0) {
    if (n < 3) throw InvalidArgument("grid needs at least 3 nodes per axis");
    if (!(length > 0.0)) throw InvalidArgument("grid extent must be positive");
    Grid g;
    g.dim = 1;
    g.nodes = {n, 1};
    g.extent = {length, 0.0};
    g.origin = {origin_x, 0.0};
    g.h = length / n;
    return g;
  }

  static Grid rectangle(int nx, int ny, double length_x, double length_y, Point origin = {0.0, 0.0}) {
    if (nx < 3 || ny < 3) throw InvalidArgument("grid needs at least 3 nodes per axis");
    if (!(length_x > 0.0 && length_y > 0.0)) throw InvalidArgument("grid extent must be positive");
    const double hx = length_x / nx, hy = length_y / ny;
    if (std::abs(hx - hy) > 1e-12 * hx) throw InvalidArgument("grid spacing must be equal on both axes");
    Grid g;
    g.dim = 2;
    g.nodes = {nx, ny};
    g.extent = {length_x, length_y};
    g.origin = origin;
    g.h = hx;
    return g;
  }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(nodes[0]) * static_cast<std::size_t>(dim == 2 ? nodes[1] : 1);
  }

  /// Cell volume h^n.
  double cell_volume() const noexcept { return dim == 2 ? h * h : h; }

  std::size_t index(int i, int j = 0) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes[0]) + static_cast<std::size_t>(i);
  }

  std::array<int, 2> coords(std::size_t idx) const noexcept {
    return {static_cast<int>(idx % static_cast<std::size_t>(nodes[0])),
            static_cast<int>(idx / static_cast<std::size_t>(nodes[0]))};
  }

  Point position(std::size_t idx) const noexcept {
    const auto c = coords(idx);
    return {origin[0] + (c[0] + 0.5) * h, dim == 2 ? origin[1] + (c[1] + 0.5) * h : 0.0};
  }

  /// Lower and upper corner of the domain.
  Point lower() const noexcept { return origin; }
  Point upper() const noexcept { return {origin[0] + extent[0], dim == 2 ? origin[1] + extent[1] : 0.0}; }

  /// Every pair of face-neighbouring nodes, oriented in the +axis direction.
  /// The ordering is fixed so reductions over edges are deterministic.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    const int ny = dim == 2 ? nodes[1] : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nodes[0]; ++i) {
        if (i + 1 < nodes[0]) out.push_back({index(i, j), index(i + 1, j), 0});
        if (dim == 2 && j + 1 < ny) out.push_back({index(i, j), index(i, j + 1), 1});
      }
    return out;
  }

  bool operator==(const Grid&) const = default;
};

inline double distance(const Point& a, const Point& b, int dim) {
  const double dx = a[0] - b[0];
  const double dy = dim == 2 ? a[1] - b[1] : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

/// Max-norm distance, used for the tensor-product cutoffs.
inline double box_distance(const Point& a, const Point& b, int dim) {
  const double dx = std::abs(a[0] - b[0]);
  return dim == 2 ? std::max(dx, std::abs(a[1] - b[1])) : dx;
}

} // namespace stefanlab
