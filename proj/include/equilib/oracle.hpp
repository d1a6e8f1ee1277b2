#pragma once

#include <vector>

#include "equilib/extraction.hpp"
#include "equilib/geometry.hpp"
#include "equilib/grid.hpp"

namespace equilib {

/// Probability vector on the nodes of a coarse grid, split into the nodes of
/// Ū (total mass p) and the rest (total mass 1 - p).
struct SimplexMeasure {
  Grid2D grid;
  std::vector<double> masses;
  std::vector<unsigned char> inside;
  double p = 1.0;

  explicit SimplexMeasure(const Grid2D& g) : grid(g), masses(g.size(), 0.0), inside(g.size(), 0) {}
  double partition_mass(bool in) const;
};

enum class StepRule {
  Pairwise,  // pairwise (toward/away) steps with exact line search
  OpenLoop,  // classic Frank-Wolfe, step 2/(k+2)
};

struct OracleOptions {
  int iters = 10000;
  StepRule rule = StepRule::Pairwise;
};

struct OracleResult {
  SimplexMeasure mu;
  double energy = 0.0;
  double duality_gap = 0.0;  // max over partitions of ∑ m (φ - min φ)
  bool monotone = true;      // energy never rose by more than 1e-9 after step 10
  double max_increase = 0.0;
  std::vector<double> energy_trace;  // energy after every 100th step
};

/// Frank-Wolfe minimisation of the discrete energy over the constrained
/// simplex product, from the uniform measure on each partition. Energies use
/// the kernel of logarithmic_energy (cell self-term -log h + kappa).
/// Throws std::invalid_argument unless mu_0(U) < p <= 1, iters >= 1000 and
/// every partition that must carry mass has nodes.
OracleResult direct_minimize(const Region& region, double p, const Grid2D& grid, const OracleOptions& options = {});

/// Uniform measure on each partition (the starting point of direct_minimize).
SimplexMeasure uniform_measure(const Region& region, double p, const Grid2D& grid);

/// φ = 2 H^mu + |x|^2 at every node.
std::vector<double> effective_potential(const SimplexMeasure& mu);
double discrete_energy(const SimplexMeasure& mu);

struct KktEstimate {
  double c1_est = 0.0;
  double c2_est = 0.0;  // -inf when p = 1
  double max_violation = 0.0;
};
KktEstimate kkt_check(const SimplexMeasure& mu);

/// The extracted measure moved to the nearest coarse node of its own
/// partition (singular atoms count as Ū), partitions rescaled to p and 1 - p.
SimplexMeasure rasterize(const ExtractedMeasure& m, const Region& region, double p, const Grid2D& coarse);

double l1_distance(const SimplexMeasure& a, const SimplexMeasure& b);

/// One-dimensional version on the boundary line of the half-plane {x < -a}:
/// `nodes` segments of equal length covering |y| <= extent, segment
/// self-term -log w + 3/2, confinement a^2 + y^2.
struct LineOracleResult {
  std::vector<double> y;
  std::vector<double> masses;
  double width = 0.0;
  double energy = 0.0;
  double duality_gap = 0.0;
};
LineOracleResult direct_minimize_line(double a, int nodes, double extent, const OracleOptions& options = {});

/// sigma([y0, y1]).
double semicircle_mass(double y0, double y1);

}  // namespace equilib
