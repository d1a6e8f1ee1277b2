#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilib/geometry.hpp"
#include "equilib/grid.hpp"

namespace equilib {

inline constexpr double kNoConstraint = -std::numeric_limits<double>::infinity();

/// Obstacle psi = (c1 - |x|^2)/2 on the closed set Ū and (c2 - |x|^2)/2
/// elsewhere; c2 = kNoConstraint leaves the complement unconstrained (the
/// p = 1 problem). p is the target mass on Ū the constants were chosen for.
struct ObstacleSpec {
  Region region;
  double c1 = 1.0;
  double c2 = kNoConstraint;
  double p = 1.0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodes at signed distance <= this (times h) count as part of the closed set
/// Ū; absorbs round-off for boundaries passing through nodes.
inline constexpr double kClosureSlack = 1e-9;

bool in_closure(const Region& region, const Grid2D& grid, Point node);

/// Throws std::invalid_argument unless c1 >= c2 (c1 == c2 is the single
/// obstacle of the unconstrained problem).
ScalarField build_obstacle(const ObstacleSpec& spec, const Grid2D& grid);

/// Dirichlet data: values on the nodes selected by `fixed` (at least the box
/// edges) are held during the solve.
struct DirichletData {
  ScalarField values;
  NodeMask fixed;
};

/// -log|x - center| on the edges of the box.
DirichletData far_field_dirichlet(const Grid2D& grid, Point center);

struct PsorOptions {
  double omega = 0.0;  // 0 selects 2/(1 + sin(pi/(n-1)))
  double tol = 1e-8;
  long max_iter = 0;  // 0 selects 200 * n
  int check_every = 10;
};

/// -log|x - center| at every node (h/2 floor on the distance).
ScalarField far_field_extension(const Grid2D& grid, Point center);

double optimal_omega(const Grid2D& grid);

struct VISolveResult {
  ScalarField H;
  long iterations = 0;
  double complementarity_residual = 0.0;
  bool converged = false;
  NodeMask contact_mask;
};

/// max over free nodes of |min(-Δ_h H, H - psi)|, with -Δ_h H in its natural
/// units (2π times the density).
double complementarity_residual(const ScalarField& H, const ScalarField& psi, const NodeMask& fixed);

/// Projected SOR for min{-Δ_h H, H - psi} = 0 with the given Dirichlet data.
/// `initial` (optional) seeds the iteration; it is clamped to psi. Never
/// throws on non-convergence: the result is flagged instead.
VISolveResult solve_vi(const ScalarField& psi, const DirichletData& dirichlet, const PsorOptions& options,
                       const ScalarField* initial = nullptr, double contact_tol = 1e-6);

struct MeasureMasses {
  double total = 0.0;
  double in_U = 0.0;
};

/// Masses of -Δ_h H / 2π: total, and on Ū dilated by half a cell.
MeasureMasses measure_masses(const ScalarField& H, const Region& region);

/// Nodal masses max(-Δ_h H, 0) h^2 / 2π (zero on the box edges).
std::vector<double> nodal_masses(const ScalarField& H);

struct CalibrationOptions {
  PsorOptions psor{};
  double tol_mass = 1e-3;
  bool recenter = true;
  bool cascade = true;
  int max_root_iter = 60;
};

struct CalibrationLevel {
  int n = 0;
  double c1 = 0.0;
  double c2 = kNoConstraint;
  int solves = 0;
  long sweeps = 0;
};

struct Calibration {
  double c1 = 0.0;
  double c2 = kNoConstraint;
  double p = 1.0;
  Point center{};
  VISolveResult vi;
  MeasureMasses masses{};
  ScalarField psi;
  int solves = 0;
  std::vector<CalibrationLevel> levels;
};

/// Finds (c1, c2) so that -Δ_h H/2π has total mass 1 and mass p on Ū, both
/// within tol_mass. Nested monotone root finding (c1 outer on the Ū mass, c2
/// inner on the total), run coarse-to-fine when `cascade` is set. For p = 1
/// only c1 is searched and c2 = kNoConstraint.
/// Throws std::invalid_argument when p is outside (mu_0(U), 1] or D \ U is
/// empty, SolverError on bracket failure, inner non-convergence, or final
/// masses outside tol_mass.
Calibration calibrate_constants(const Region& region, double p, const Grid2D& grid,
                                const CalibrationOptions& options = {});

/// Single VI solve with fixed constants on the full-size grid, seeded by a
/// coarse-to-fine cascade. Used for the unconstrained (c1 = c2) problem.
VISolveResult solve_fixed_constants(const ObstacleSpec& spec, const Grid2D& grid, Point center,
                                    const PsorOptions& psor, bool cascade = true);

/// Bilinear prolongation from a grid with (n-1)/2 intervals to `fine`.
ScalarField prolong(const ScalarField& coarse, const Grid2D& fine);

}  // namespace equilib
