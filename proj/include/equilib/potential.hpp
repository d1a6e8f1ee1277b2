#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "equilib/geometry.hpp"
#include "equilib/grid.hpp"

namespace equilib {

// Mean of -log|x-y| over a unit square cell against itself, and over a unit
// segment against itself. Generated by tools/oracles/compute_kappa.py.
extern const double kCellSelfLogConstant;
extern const double kSegmentSelfLogConstant;

/// Radius of the support of the semicircle law sigma.
inline const double kSemicircleEdge = std::numbers::sqrt2;

/// 2 H^sigma + |t|^2 on the support of sigma, i.e. the Euler-Lagrange
/// constant of the semicircle law for the quadratic confinement.
inline const double kSemicircleConstant = 1.0 + std::numbers::ln2;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// H^{mu_0}: (1 - |x|^2)/2 inside the unit disk, -log|x| outside.
double circular_law_potential(Point pt);
Point circular_law_potential_gradient(Point pt);

/// sqrt(2 - y^2)/pi on |y| < sqrt(2), zero elsewhere.
double semicircle_density(double y);

/// Logarithmic potential of sigma placed on the imaginary axis:
///   H^sigma(z) = -∫ log|z - i t| sigma(dt),  z = (x, y),
/// so x is the offset transverse to the support line and y runs along it.
/// Adaptive tanh-sinh quadrature, absolute error about 1e-10.
double semicircle_potential(Point z);

/// Gradient of semicircle_potential, differentiating under the integral.
Point semicircle_potential_gradient(Point z);

/// Stieltjes transform ∫ sigma(dx)/(x - z) = -(z - sqrt(z^2 - 2)) for Im z > 0,
/// with the branch of the root asymptotic to z. Throws DomainError otherwise.
std::complex<double> stieltjes_semicircle(std::complex<double> z);

/// Point mass carried by a boundary sample (a segment of length arc_weight).
struct BoundaryAtom {
  BoundarySample sample;
  double mass = 0.0;
};

/// Masses attached to the cells of a grid (one square cell of side h centred
/// on every node) plus optional atoms on boundary segments. Signed masses are
/// allowed for the logarithmic energy of a difference of measures; energy()
/// itself requires nonnegative masses.
struct DiscreteMeasure {
  Grid2D grid;
  std::vector<double> cell_masses;
  std::vector<BoundaryAtom> atoms;

  explicit DiscreteMeasure(const Grid2D& g) : grid(g), cell_masses(g.size(), 0.0) {}

  double total_mass() const;
  Point centroid() const;
};

/// rho = mu - nu on a common grid.
DiscreteMeasure difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// mu_0 on the cells of `grid`: mass area(cell ∩ D)/pi per cell.
DiscreteMeasure discretize_circular_law(const Grid2D& grid);

/// Double sum -∑∑ log|x-y| m_x m_y with the exact cell (-log h + kappa) and
/// segment (-log w + 3/2) self-averages on the diagonal.
double logarithmic_energy(const DiscreteMeasure& mu);

/// I[mu] = logarithmic_energy + ∑ |x|^2 m_x. Throws std::invalid_argument on
/// negative masses.
double energy(const DiscreteMeasure& mu);

/// (1/2pi) ∑ |∇H|^2 h^2 with centred differences, the Dirichlet form of the
/// neutral measure rho_plus - rho_minus whose potential is `potential`.
/// Throws std::invalid_argument("identity requires neutral rho") when the
/// two masses differ by more than 1e-6.
double energy_via_dirichlet(const DiscreteMeasure& rho_plus, const DiscreteMeasure& rho_minus,
                            const ScalarField& potential);

}  // namespace equilib
