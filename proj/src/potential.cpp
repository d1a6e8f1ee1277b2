#include "equilib/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "equilib/parallel.hpp"

namespace equilib {

namespace {

using std::numbers::pi;

constexpr double kQuadTol = 1e-12;

boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> q(15);
  return q;
}

// ∫ f(t) sigma(dt) with t = sqrt(2) sin(theta), sigma(dt) = (2/pi) cos^2(theta) dtheta.
// The interval is split at theta = asin(y/sqrt 2) where the integrands below
// have their (near-)singularity.
template <class F>
double semicircle_integral(F f, double y) {
  auto g = [&](double theta) {
    const double c = std::cos(theta);
    return f(kSemicircleEdge * std::sin(theta)) * (2.0 / pi) * c * c;
  };
  const double half = pi / 2.0;
  double split = std::asin(std::clamp(y / kSemicircleEdge, -1.0, 1.0));
  double total = 0.0;
  if (split > -half) total += integrator().integrate(g, -half, split, kQuadTol);
  if (split < half) total += integrator().integrate(g, split, half, kQuadTol);
  return total;
}

// Area of [x0,x1]x[y0,y1] inside the unit disk.
double rect_disk_area(double x0, double x1, double y0, double y1) {
  const double cx = std::max(std::abs(x0), std::abs(x1));
  const double cy = std::max(std::abs(y0), std::abs(y1));
  if (cx * cx + cy * cy <= 1.0) return (x1 - x0) * (y1 - y0);
  const double nx = (x0 <= 0.0 && x1 >= 0.0) ? 0.0 : std::min(std::abs(x0), std::abs(x1));
  const double ny = (y0 <= 0.0 && y1 >= 0.0) ? 0.0 : std::min(std::abs(y0), std::abs(y1));
  if (nx * nx + ny * ny >= 1.0) return 0.0;
  auto chord = [&](double x) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    return std::max(0.0, std::min(y1, s) - std::max(y0, -s));
  };
  std::vector<double> breaks{x0, x1};
  for (double yb : {y0, y1}) {
    if (std::abs(yb) < 1.0) {
      const double xb = std::sqrt(1.0 - yb * yb);
      for (double c : {-xb, xb})
        if (c > x0 && c < x1) breaks.push_back(c);
    }
  }
  for (double c : {-1.0, 1.0})
    if (c > x0 && c < x1) breaks.push_back(c);
  std::sort(breaks.begin(), breaks.end());
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] > breaks[k])
      area += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(chord, breaks[k], breaks[k + 1], 8, 1e-13);
  }
  return area;
}

struct CellAtom {
  int i;
  int j;
  double m;
};

}  // namespace

double circular_law_potential(Point pt) {
  const double r2 = norm2(pt);
  if (r2 <= 1.0) return 0.5 * (1.0 - r2);
  return -0.5 * std::log(r2);
}

Point circular_law_potential_gradient(Point pt) {
  const double r2 = norm2(pt);
  if (r2 <= 1.0) return {-pt.x, -pt.y};
  return {-pt.x / r2, -pt.y / r2};
}

double semicircle_density(double y) {
  const double s = 2.0 - y * y;
  return s > 0.0 ? std::sqrt(s) / pi : 0.0;
}

double semicircle_potential(Point z) {
  const double x2 = z.x * z.x;
  // The split point t = y can be hit exactly when x = 0; a single point
  // carries no mass, so the integrand is taken as 0 there.
  return semicircle_integral(
      [&](double t) {
        const double d2 = x2 + (z.y - t) * (z.y - t);
        return d2 > 0.0 ? -0.5 * std::log(d2) : 0.0;
      },
      z.y);
}

Point semicircle_potential_gradient(Point z) {
  const double x2 = z.x * z.x;
  auto kernel = [&](double t, double num) {
    const double d2 = x2 + (z.y - t) * (z.y - t);
    return d2 > 0.0 ? -num / d2 : 0.0;
  };
  const double gx = semicircle_integral([&](double t) { return kernel(t, z.x); }, z.y);
  const double gy = semicircle_integral([&](double t) { return kernel(t, z.y - t); }, z.y);
  return {gx, gy};
}

std::complex<double> stieltjes_semicircle(std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw DomainError("Stieltjes transform needs Im z > 0");
  const std::complex<double> root = std::sqrt(z - kSemicircleEdge) * std::sqrt(z + kSemicircleEdge);
  return -(z - root);
}

double DiscreteMeasure::total_mass() const {
  double m = 0.0;
  for (double v : cell_masses) m += v;
  for (const auto& a : atoms) m += a.mass;
  return m;
}

Point DiscreteMeasure::centroid() const {
  double m = 0.0;
  Point c{};
  for (std::size_t k = 0; k < cell_masses.size(); ++k) {
    if (cell_masses[k] == 0.0) continue;
    m += cell_masses[k];
    c = c + cell_masses[k] * grid.node(k);
  }
  for (const auto& a : atoms) {
    m += a.mass;
    c = c + a.mass * a.sample.position;
  }
  return m != 0.0 ? (1.0 / m) * c : Point{};
}

DiscreteMeasure difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (!(mu.grid == nu.grid)) throw std::invalid_argument("measures live on different grids");
  DiscreteMeasure rho(mu.grid);
  for (std::size_t k = 0; k < rho.cell_masses.size(); ++k) rho.cell_masses[k] = mu.cell_masses[k] - nu.cell_masses[k];
  rho.atoms = mu.atoms;
  for (auto a : nu.atoms) {
    a.mass = -a.mass;
    rho.atoms.push_back(a);
  }
  return rho;
}

DiscreteMeasure discretize_circular_law(const Grid2D& grid) {
  DiscreteMeasure mu(grid);
  const double h = grid.h();
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const Point c = grid.node(i, j);
      mu.cell_masses[grid.index(i, j)] = rect_disk_area(c.x - h / 2, c.x + h / 2, c.y - h / 2, c.y + h / 2) / pi;
    }
  }
  return mu;
}

double logarithmic_energy(const DiscreteMeasure& mu) {
  const Grid2D& g = mu.grid;
  const int n = g.n();
  const double h = g.h();

  std::vector<CellAtom> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (const double m = mu.cell_masses[g.index(i, j)]; m != 0.0) cells.push_back({i, j, m});

  // Kernel values depend only on the index offset.
  std::vector<double> table(static_cast<std::size_t>(n) * n);
  for (int dj = 0; dj < n; ++dj)
    for (int di = 0; di < n; ++di)
      table[static_cast<std::size_t>(dj) * n + di] =
          (di == 0 && dj == 0) ? -std::log(h) + kCellSelfLogConstant : -std::log(h * std::hypot(di, dj));

  constexpr std::size_t kChunks = 64;
  const std::size_t nc = cells.size();
  // Rows are interleaved across chunks to balance the triangular loop.
  const double cell_cell = chunked_sum(kChunks, [&](std::size_t chunk) {
    double s = 0.0;
    for (std::size_t a = chunk; a < nc; a += kChunks) {
      const CellAtom ca = cells[a];
      double row = 0.0;
      for (std::size_t b = a + 1; b < nc; ++b) {
        const CellAtom cb = cells[b];
        row += cb.m * table[static_cast<std::size_t>(std::abs(cb.j - ca.j)) * n + std::abs(cb.i - ca.i)];
      }
      s += ca.m * (2.0 * row + ca.m * table[0]);
    }
    return s;
  });

  double cross = 0.0;
  double atom_atom = 0.0;
  const auto& atoms = mu.atoms;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const BoundaryAtom& a = atoms[k];
    double row = 0.0;
    for (const CellAtom& c : cells) row += c.m * -std::log(norm(g.node(c.i, c.j) - a.sample.position));
    cross += 2.0 * a.mass * row;
    double arow = 0.0;
    for (std::size_t l = k + 1; l < atoms.size(); ++l)
      arow += atoms[l].mass * -std::log(norm(atoms[l].sample.position - a.sample.position));
    atom_atom += a.mass * (2.0 * arow + a.mass * (-std::log(a.sample.arc_weight) + kSegmentSelfLogConstant));
  }
  return cell_cell + cross + atom_atom;
}

double energy(const DiscreteMeasure& mu) {
  double moment = 0.0;
  for (std::size_t k = 0; k < mu.cell_masses.size(); ++k) {
    const double m = mu.cell_masses[k];
    if (m < 0.0) throw std::invalid_argument("energy requires a nonnegative measure");
    if (m != 0.0) moment += m * norm2(mu.grid.node(k));
  }
  for (const auto& a : mu.atoms) {
    if (a.mass < 0.0) throw std::invalid_argument("energy requires a nonnegative measure");
    moment += a.mass * norm2(a.sample.position);
  }
  return logarithmic_energy(mu) + moment;
}

double energy_via_dirichlet(const DiscreteMeasure& rho_plus, const DiscreteMeasure& rho_minus,
                            const ScalarField& potential) {
  if (std::abs(rho_plus.total_mass() - rho_minus.total_mass()) > 1e-6)
    throw std::invalid_argument("identity requires neutral rho");
  const Grid2D& g = potential.grid;
  const int n = g.n();
  const double h = g.h();
  double sum = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const double gx = (potential(i + 1, j) - potential(i - 1, j)) / (2.0 * h);
      const double gy = (potential(i, j + 1) - potential(i, j - 1)) / (2.0 * h);
      sum += gx * gx + gy * gy;
    }
  }
  return sum * h * h / (2.0 * pi);
}

}  // namespace equilib
