#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "equilib/geometry.hpp"

namespace equilib {

/// Uniform square grid on [-R, R]^2 with n nodes per side. n is odd so the
/// origin is a node; node (i, j) sits at (-R + i*h, -R + j*h).
class Grid2D {
 public:
  Grid2D(double box_radius, int nodes_per_side);

  double box_radius() const { return radius_; }
  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  // Coordinates are formed as R*(2i-(n-1))/(n-1) so that symmetric nodes are
  // exact mirror images and the origin is exactly zero.
  double coord(int i) const {
    return radius_ * static_cast<double>(2 * i - (n_ - 1)) / static_cast<double>(n_ - 1);
  }
  Point node(int i, int j) const { return {coord(i), coord(j)}; }
  Point node(std::size_t k) const {
    return node(static_cast<int>(k % static_cast<std::size_t>(n_)), static_cast<int>(k / static_cast<std::size_t>(n_)));
  }
  bool on_edge(int i, int j) const { return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  double radius_;
  int n_;
  double h_;
};

/// Solver grids additionally need n >= 33 and R >= 2 so that the unit disk
/// and the support of the minimizer sit well inside the box.
void require_solver_grid(const Grid2D& grid);

/// Real values at every node of a grid.
struct ScalarField {
  Grid2D grid;
  std::vector<double> values;

  explicit ScalarField(const Grid2D& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }

  /// Bilinear interpolation; points outside the box are clamped to it.
  double interpolate(Point p) const;
};

/// Boolean mask over the nodes of a grid.
struct NodeMask {
  Grid2D grid;
  std::vector<unsigned char> values;

  explicit NodeMask(const Grid2D& g, bool fill = false) : grid(g), values(g.size(), fill ? 1 : 0) {}
  bool operator()(int i, int j) const { return values[grid.index(i, j)] != 0; }
  std::size_t count() const;
};

/// -Δ_h f at interior node (i, j), 5-point stencil.
inline double neg_laplacian(const ScalarField& f, int i, int j) {
  const double h = f.grid.h();
  return (4.0 * f(i, j) - f(i - 1, j) - f(i + 1, j) - f(i, j - 1) - f(i, j + 1)) / (h * h);
}

}  // namespace equilib
