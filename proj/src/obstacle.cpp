#include "equilib/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace equilib {

namespace {

using std::numbers::pi;

constexpr double kDiameter = 2.0;  // diameter of the unit disk, scales the initial brackets

double solve_tolerance_contact(double c1, double c2) {
  return 1e-6 * (std::isfinite(c2) ? c1 - c2 + 1.0 : 1.0 + std::abs(c1));
}

// One grid level of the calibration: owns the Dirichlet data and the warm
// start carried between consecutive solves.
class LevelSolver {
 public:
  LevelSolver(const Region& region, const Grid2D& grid, Point center, const PsorOptions& psor)
      : region_(region), grid_(grid), psor_(psor), dirichlet_(far_field_dirichlet(grid, center)), warm_(grid) {}

  void seed(const ScalarField& field) {
    warm_ = field;
    has_warm_ = true;
  }

  struct Eval {
    double c1;
    double c2;
    MeasureMasses masses;
  };

  Eval solve(double c1, double c2) {
    ObstacleSpec spec{region_, c1, c2, 1.0};
    ScalarField psi = build_obstacle(spec, grid_);
    VISolveResult vi = solve_vi(psi, dirichlet_, psor_, has_warm_ ? &warm_ : nullptr, solve_tolerance_contact(c1, c2));
    ++solves_;
    sweeps_ += vi.iterations;
    if (!vi.converged) {
      throw SolverError("inner VI did not converge (n=" + std::to_string(grid_.n()) +
                        ", residual=" + std::to_string(vi.complementarity_residual) + ")");
    }
    warm_ = vi.H;
    has_warm_ = true;
    Eval e{c1, c2, measure_masses(vi.H, region_)};
    last_ = e;
    last_vi_ = std::move(vi);
    last_psi_ = std::move(psi);
    return e;
  }

  const Eval& last() const { return last_; }
  const VISolveResult& last_vi() const { return *last_vi_; }
  const ScalarField& last_psi() const { return *last_psi_; }
  int solves() const { return solves_; }
  long sweeps() const { return sweeps_; }
  const Grid2D& grid() const { return grid_; }

 private:
  Region region_;
  Grid2D grid_;
  PsorOptions psor_;
  DirichletData dirichlet_;
  ScalarField warm_;
  bool has_warm_ = false;
  Eval last_{};
  std::optional<VISolveResult> last_vi_;
  std::optional<ScalarField> last_psi_;
  int solves_ = 0;
  long sweeps_ = 0;
};

inline constexpr double kTooSmall = -std::numeric_limits<double>::infinity();
inline constexpr double kTooLarge = std::numeric_limits<double>::infinity();

// Root of a nondecreasing f that may return kTooSmall/kTooLarge where it is
// undefined. Starts from [guess - delta, guess + delta] (optionally capped at
// `cap`), expands geometrically, then runs Illinois regula falsi (bisection
// whenever an endpoint value is a sentinel). Returns the last evaluated x
// whose value met |f| <= ftol, or the best one when the bracket collapses.
struct RootResult {
  double x;
  double fx;
};

template <class F>
RootResult find_root(F&& f, double guess, double delta, double ftol, int max_iter,
                     double cap = std::numeric_limits<double>::infinity()) {
  int expansions = 0;
  double step = delta;
  double hi = std::min(guess + delta, cap);
  double fhi = f(hi);
  if (std::abs(fhi) <= ftol) return {hi, fhi};
  double lo;
  double flo;
  if (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    while (fhi < 0.0) {
      if (hi >= cap) return {hi, fhi};  // no root below the cap
      if (++expansions > 60) throw SolverError("calibration bracket failed");
      lo = hi;
      flo = fhi;
      hi = std::min(hi + step, cap);
      step *= 2.0;
      fhi = f(hi);
      if (std::abs(fhi) <= ftol) return {hi, fhi};
    }
  } else {
    lo = guess - delta;
    flo = f(lo);
    if (std::abs(flo) <= ftol) return {lo, flo};
    while (flo > 0.0) {
      if (++expansions > 60 || flo == kTooLarge) {
        if (flo == kTooLarge) return {lo, flo};
        throw SolverError("calibration bracket failed");
      }
      hi = lo;
      fhi = flo;
      lo -= step;
      step *= 2.0;
      flo = f(lo);
      if (std::abs(flo) <= ftol) return {lo, flo};
    }
  }

  int side = 0;
  double best_x = std::abs(flo) < std::abs(fhi) ? lo : hi;
  double best_f = std::abs(flo) < std::abs(fhi) ? flo : fhi;
  for (int it = 0; it < max_iter; ++it) {
    double x = 0.5 * (lo + hi);
    if (std::isfinite(flo) && std::isfinite(fhi) && fhi != flo) {
      const double xr = (lo * fhi - hi * flo) / (fhi - flo);
      const double margin = 1e-3 * (hi - lo);
      if (xr > lo + margin && xr < hi - margin) x = xr;
    }
    const double fx = f(x);
    if (std::isfinite(fx) && std::abs(fx) < std::abs(best_f)) {
      best_x = x;
      best_f = fx;
    }
    if (std::abs(fx) <= ftol) return {x, fx};
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == -1 && std::isfinite(fhi)) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == +1 && std::isfinite(flo)) flo *= 0.5;
      side = +1;
    }
    if (hi - lo <= 1e-13 * (1.0 + std::abs(x))) break;
  }
  return {best_x, best_f};
}

// Calibrates the constants on one level. Returns the (c1, c2) found; the
// solver's last evaluation corresponds to them.
std::pair<double, double> calibrate_level(LevelSolver& level, double p, double tol_mass, double c1_guess,
                                          double c1_delta, double c2_guess, double c2_delta, int max_iter) {
  const double f_outer = tol_mass / 2.0;
  const double f_inner = tol_mass / 4.0;

  if (p >= 1.0) {
    auto total = [&](double c1) { return level.solve(c1, kNoConstraint).masses.total - 1.0; };
    RootResult r = find_root(total, c1_guess, c1_delta, f_outer, max_iter);
    if (level.last().c1 != r.x) level.solve(r.x, kNoConstraint);
    return {r.x, kNoConstraint};
  }

  double c2_current = c2_guess;
  double c2_step = c2_delta;
  auto outer = [&](double c1) -> double {
    auto inner = [&](double c2) { return level.solve(c1, c2).masses.total - 1.0; };
    auto inner_guarded = [&](double c2) -> double {
      const double v = inner(c2);
      // Far below the Ū constant the outside obstacle is inactive; if the
      // total still exceeds one, no c2 works for this c1.
      if (v > f_inner && c2 < c1 - 4.0 * kDiameter * kDiameter) {
        const double bottom = inner(kNoConstraint);
        if (bottom > f_inner) return kTooLarge;
      }
      return v;
    };
    RootResult r = find_root(inner_guarded, std::min(c2_current, c1), c2_step, f_inner, max_iter, c1);
    if (r.fx == kTooLarge) return kTooLarge;
    if (r.fx < -f_inner) return kTooSmall;  // even c2 = c1 leaves total < 1
    if (level.last().c1 != c1 || level.last().c2 != r.x) level.solve(c1, r.x);
    c2_step = std::max(std::abs(r.x - c2_current), 1e-4);
    c2_current = r.x;
    return level.last().masses.in_U - p;
  };
  RootResult r = find_root(outer, c1_guess, c1_delta, f_outer, max_iter);
  if (level.last().c1 != r.x) outer(r.x);
  return {level.last().c1, level.last().c2};
}

std::vector<int> cascade_sizes(int n, bool cascade) {
  std::vector<int> sizes{n};
  if (!cascade) return sizes;
  int m = n;
  while ((m - 1) % 4 == 0 && (m - 1) / 2 + 1 >= 33) {
    m = (m - 1) / 2 + 1;
    sizes.push_back(m);
  }
  std::reverse(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace

bool in_closure(const Region& region, const Grid2D& grid, Point node) {
  return signed_distance(region, node) <= kClosureSlack * grid.h();
}

ScalarField build_obstacle(const ObstacleSpec& spec, const Grid2D& grid) {
  if (!(spec.c1 >= spec.c2)) throw std::invalid_argument("obstacle constants need c1 >= c2");
  ScalarField psi(grid);
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const Point x = grid.node(i, j);
      const double c = in_closure(spec.region, grid, x) ? spec.c1 : spec.c2;
      psi(i, j) = std::isfinite(c) ? 0.5 * (c - norm2(x)) : kNoConstraint;
    }
  }
  return psi;
}

DirichletData far_field_dirichlet(const Grid2D& grid, Point center) {
  DirichletData d{ScalarField(grid), NodeMask(grid)};
  const int n = grid.n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!grid.on_edge(i, j)) continue;
      d.values(i, j) = -std::log(norm(grid.node(i, j) - center));
      d.fixed.values[grid.index(i, j)] = 1;
    }
  }
  return d;
}

ScalarField far_field_extension(const Grid2D& grid, Point center) {
  ScalarField f(grid);
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i)
      f(i, j) = -std::log(std::max(norm(grid.node(i, j) - center), grid.h() / 2.0));
  return f;
}

double optimal_omega(const Grid2D& grid) { return 2.0 / (1.0 + std::sin(pi / (grid.n() - 1))); }

double complementarity_residual(const ScalarField& H, const ScalarField& psi, const NodeMask& fixed) {
  const int n = H.grid.n();
  double r = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      if (fixed(i, j)) continue;
      const double lap = neg_laplacian(H, i, j);
      const double gap = H(i, j) - psi(i, j);
      r = std::max(r, std::abs(std::min(lap, gap)));
    }
  }
  return r;
}

VISolveResult solve_vi(const ScalarField& psi, const DirichletData& dirichlet, const PsorOptions& options,
                       const ScalarField* initial, double contact_tol) {
  const Grid2D& grid = psi.grid;
  if (!(dirichlet.values.grid == grid)) throw std::invalid_argument("Dirichlet data on a different grid");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const int n = grid.n();
  const double omega = options.omega > 0.0 ? options.omega : optimal_omega(grid);
  if (!(omega >= 1.0 && omega < 2.0)) throw std::invalid_argument("omega must lie in [1, 2)");
  const long max_iter = options.max_iter > 0 ? options.max_iter : 200L * n;
  const int check_every = std::max(1, options.check_every);

  VISolveResult out{initial ? *initial : ScalarField(grid), 0, 0.0, false, NodeMask(grid)};
  if (initial && !(initial->grid == grid)) throw std::invalid_argument("initial field on a different grid");
  std::vector<double>& H = out.H.values;
  const std::vector<double>& lower = psi.values;
  const auto& fixed = dirichlet.fixed.values;
  for (std::size_t k = 0; k < H.size(); ++k) {
    if (fixed[k]) {
      H[k] = dirichlet.values.values[k];
    } else {
      H[k] = std::max(H[k], lower[k]);
    }
  }
  bool inner_fixed = false;
  for (int j = 1; j < n - 1 && !inner_fixed; ++j)
    for (int i = 1; i < n - 1; ++i)
      if (fixed[grid.index(i, j)]) {
        inner_fixed = true;
        break;
      }

  const std::size_t stride = static_cast<std::size_t>(n);
  for (long it = 1; it <= max_iter; ++it) {
    for (int j = 1; j < n - 1; ++j) {
      std::size_t k = grid.index(1, j);
      for (int i = 1; i < n - 1; ++i, ++k) {
        if (inner_fixed && fixed[k]) continue;
        const double gs = 0.25 * (H[k - 1] + H[k + 1] + H[k - stride] + H[k + stride]);
        const double v = H[k] + omega * (gs - H[k]);
        H[k] = v > lower[k] ? v : lower[k];
      }
    }
    out.iterations = it;
    if (it % check_every == 0 || it == max_iter) {
      out.complementarity_residual = complementarity_residual(out.H, psi, dirichlet.fixed);
      if (!std::isfinite(out.complementarity_residual)) break;
      if (out.complementarity_residual <= options.tol) {
        out.converged = true;
        break;
      }
    }
  }
  for (std::size_t k = 0; k < H.size(); ++k) out.contact_mask.values[k] = (!fixed[k] && H[k] - lower[k] <= contact_tol) ? 1 : 0;
  return out;
}

std::vector<double> nodal_masses(const ScalarField& H) {
  const Grid2D& g = H.grid;
  const int n = g.n();
  const double w = g.h() * g.h() / (2.0 * pi);
  std::vector<double> m(g.size(), 0.0);
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) m[g.index(i, j)] = std::max(neg_laplacian(H, i, j), 0.0) * w;
  return m;
}

MeasureMasses measure_masses(const ScalarField& H, const Region& region) {
  const Grid2D& g = H.grid;
  const std::vector<double> m = nodal_masses(H);
  MeasureMasses out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] == 0.0) continue;
    out.total += m[k];
    if (signed_distance(region, g.node(k)) <= g.h() / 2.0) out.in_U += m[k];
  }
  return out;
}

ScalarField prolong(const ScalarField& coarse, const Grid2D& fine) {
  const Grid2D& cg = coarse.grid;
  if (fine.n() - 1 != 2 * (cg.n() - 1) || fine.box_radius() != cg.box_radius())
    throw std::invalid_argument("prolongation needs a grid with twice the intervals");
  ScalarField f(fine);
  for (int j = 0; j < fine.n(); ++j) {
    for (int i = 0; i < fine.n(); ++i) {
      const int ci = i / 2;
      const int cj = j / 2;
      const int ci1 = std::min(ci + (i % 2), cg.n() - 1);
      const int cj1 = std::min(cj + (j % 2), cg.n() - 1);
      f(i, j) = 0.25 * (coarse(ci, cj) + coarse(ci1, cj) + coarse(ci, cj1) + coarse(ci1, cj1));
    }
  }
  return f;
}

VISolveResult solve_fixed_constants(const ObstacleSpec& spec, const Grid2D& grid, Point center, const PsorOptions& psor,
                                    bool cascade) {
  require_solver_grid(grid);
  std::optional<ScalarField> warm;
  std::optional<VISolveResult> result;
  long sweeps = 0;
  for (int m : cascade_sizes(grid.n(), cascade)) {
    const Grid2D g(grid.box_radius(), m);
    const ScalarField psi = build_obstacle(spec, g);
    const DirichletData dir = far_field_dirichlet(g, center);
    ScalarField seed = warm ? prolong(*warm, g) : far_field_extension(g, center);
    result = solve_vi(psi, dir, psor, &seed, solve_tolerance_contact(spec.c1, spec.c2));
    sweeps += result->iterations;
    warm = result->H;
  }
  result->iterations = sweeps;
  return std::move(*result);
}

Calibration calibrate_constants(const Region& region, double p, const Grid2D& grid, const CalibrationOptions& options) {
  validate(region);
  require_solver_grid(grid);
  const double mu0 = circular_law_mass(region);
  if (!(mu0 < 1.0)) throw std::invalid_argument("D \\ U must be nonempty");
  if (!(p > mu0) || p > 1.0) {
    throw std::invalid_argument("p must satisfy mu_0(U) < p <= 1 (mu_0(U) = " + std::to_string(mu0) +
                                ", p = " + std::to_string(p) + ")");
  }
  if (!(options.tol_mass > 0.0)) throw std::invalid_argument("tol_mass must be positive");

  const std::vector<int> sizes = cascade_sizes(grid.n(), options.cascade);
  Calibration out{0.0, kNoConstraint, p, {}, VISolveResult{ScalarField(grid), 0, 0.0, false, NodeMask(grid)},
                  {}, ScalarField(grid), 0, {}};
  const int max_iter = options.max_root_iter;

  double c1 = 1.0 + kDiameter * kDiameter;  // middle of [1, 1 + 2 diam^2]
  double c1_delta = kDiameter * kDiameter;
  double c2 = 1.0;
  double c2_delta = 0.5;
  Point center{};
  std::optional<ScalarField> warm;

  for (std::size_t level = 0; level < sizes.size(); ++level) {
    const Grid2D g(grid.box_radius(), sizes[level]);
    int passes = (level == 0 && options.recenter) ? 2 : 1;
    for (int pass = 0; pass < passes; ++pass) {
      LevelSolver solver(region, g, center, options.psor);
      if (warm) solver.seed(warm->grid == g ? *warm : prolong(*warm, g));
      const auto [c1_new, c2_new] = calibrate_level(solver, p, options.tol_mass, c1, c1_delta, c2, c2_delta, max_iter);
      const double moved = std::abs(c1_new - c1);
      if (level > 0 || pass > 0) {
        c1_delta = std::max(2.0 * moved, 1e-3);
        c2_delta = std::max(2.0 * std::abs(c2_new - c2), 1e-3);
      } else {
        c1_delta = 0.05;
        c2_delta = 0.05;
      }
      c1 = c1_new;
      c2 = c2_new;
      out.solves += solver.solves();
      out.levels.push_back({g.n(), c1, c2, solver.solves(), solver.sweeps()});
      warm = solver.last_vi().H;
      if (level + 1 == sizes.size() && pass + 1 == passes) {
        out.vi = solver.last_vi();
        out.psi = solver.last_psi();
        out.masses = solver.last().masses;
      }
      if (options.recenter && !(level + 1 == sizes.size() && pass + 1 == passes)) {
        // Far-field data of the next solve is centred at the centroid of this one.
        const std::vector<double> m = nodal_masses(solver.last_vi().H);
        double total = 0.0;
        Point c{};
        for (std::size_t k = 0; k < m.size(); ++k) {
          total += m[k];
          c = c + m[k] * g.node(k);
        }
        if (total > 0.0) center = (1.0 / total) * c;
      }
    }
  }
  // The c1 search stops at the cap c1 = c2 when p is within the
  // discretisation error of mu_0(U); report that instead of a wrong measure.
  const double miss_U = std::abs(out.masses.in_U - p);
  const double miss_total = std::abs(out.masses.total - 1.0);
  if (miss_U > options.tol_mass || miss_total > options.tol_mass) {
    throw SolverError("calibration missed the mass targets (|mass on U - p| = " + std::to_string(miss_U) +
                      ", |total - 1| = " + std::to_string(miss_total) + "); p may be too close to mu_0(U) = " +
                      std::to_string(mu0) + " for this grid");
  }
  out.c1 = c1;
  out.c2 = c2;
  out.center = center;
  return out;
}

}  // namespace equilib
