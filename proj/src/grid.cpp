#include "equilib/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace equilib {

Grid2D::Grid2D(double box_radius, int nodes_per_side)
    : radius_(box_radius), n_(nodes_per_side), h_(2.0 * box_radius / (nodes_per_side - 1)) {
  if (!(box_radius > 0.0) || !std::isfinite(box_radius)) throw std::invalid_argument("grid box radius must be positive");
  if (nodes_per_side < 3 || nodes_per_side % 2 == 0)
    throw std::invalid_argument("grid needs an odd number (>= 3) of nodes per side");
}

void require_solver_grid(const Grid2D& grid) {
  if (grid.n() < 33) throw std::invalid_argument("solver grid needs n >= 33, got " + std::to_string(grid.n()));
  if (grid.box_radius() < 2.0) throw std::invalid_argument("solver grid needs box radius R >= 2");
}

double ScalarField::interpolate(Point p) const {
  const double h = grid.h();
  const double r = grid.box_radius();
  const int n = grid.n();
  const double fx = std::clamp((p.x + r) / h, 0.0, static_cast<double>(n - 1));
  const double fy = std::clamp((p.y + r) / h, 0.0, static_cast<double>(n - 1));
  const int i = std::min(static_cast<int>(fx), n - 2);
  const int j = std::min(static_cast<int>(fy), n - 2);
  const double tx = fx - i;
  const double ty = fy - j;
  return (1 - tx) * (1 - ty) * (*this)(i, j) + tx * (1 - ty) * (*this)(i + 1, j) + (1 - tx) * ty * (*this)(i, j + 1) +
         tx * ty * (*this)(i + 1, j + 1);
}

std::size_t NodeMask::count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](unsigned char v) { return v != 0; }));
}

}  // namespace equilib
