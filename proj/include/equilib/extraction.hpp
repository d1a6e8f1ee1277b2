#pragma once

#include <optional>
#include <vector>

#include "equilib/geometry.hpp"
#include "equilib/grid.hpp"
#include "equilib/obstacle.hpp"
#include "equilib/potential.hpp"

namespace equilib {

/// Densities below this are solver noise (free nodes carry |Δ_h H| <= tol)
/// and are dropped.
inline constexpr double kDensityFloor = 1e-7;

/// Half-width of the band around ∂U excluded from the regular part, in cells.
inline constexpr double kBandCells = 1.5;

/// Regular density max(-Δ_h H, 0)/2π off the band. Band nodes take the value
/// found 2.5h away along the normal on their own side of ∂U, so the band does
/// not double-count the line mass. V_mask marks density > 1/(2π).
struct RegularPart {
  ScalarField density;
  NodeMask V_mask;
  NodeMask band;
};
RegularPart extract_regular(const ScalarField& H, const Region& region);

/// Boundary samples used for the singular part: spacing h; the half-plane line
/// is cut 4h short of the box.
std::vector<BoundarySample> singular_samples(const Region& region, const Grid2D& grid);

/// g = (∂_ν^in H - ∂_ν^out H)/2π at every sample from one-sided second-order
/// differences on bilinear samples at distance h, 2h, 3h; negative values are
/// clamped to 0 and counted in `clamped` (if given).
/// Throws std::invalid_argument when a stencil leaves the box interior or the
/// samples are coarser than 2h.
std::vector<double> extract_singular(const ScalarField& H, const Region& region,
                                     const std::vector<BoundarySample>& samples, int* clamped = nullptr);

struct SingularPoint {
  BoundarySample sample;
  double s = 0.0;  // arclength along the sample sequence, at the sample
  double g = 0.0;
};

struct ExtractedMeasure {
  RegularPart regular;
  std::vector<SingularPoint> singular;
  double mass_regular = 0.0;
  double mass_singular = 0.0;
  double mass_closure = 0.0;  // regular mass on Ū plus singular mass
  int clamped_samples = 0;
};

ExtractedMeasure extract_measure(const ScalarField& H, const Region& region);

/// The extracted measure as cells plus boundary atoms, scaled to mass 1.
DiscreteMeasure to_discrete_measure(const ExtractedMeasure& m);

/// The solver's own measure max(-Δ_h H, 0) h^2/2π on cells (floored),
/// scaled to mass 1.
DiscreteMeasure nodal_measure(const ScalarField& H);

/// Both sides of the energy identity for rho = nodal_measure(H) - mu_0:
/// the double-sum logarithmic energy and (1/2π)∑|∇(H - H^{mu_0})|^2 h^2.
struct EnergyIdentity {
  double double_sum = 0.0;
  double dirichlet = 0.0;
  double relative = 0.0;  // |dirichlet - double_sum| / |double_sum|
  bool ok = false;        // relative <= 0.02
};
EnergyIdentity energy_identity(const ScalarField& H);

struct Check {
  bool ok = false;
  double margin = 0.0;
};

/// Smallest distance to ∂U of a V node outside Ū; ok iff >= 2h (vacuous: +inf).
Check check_gap(const NodeMask& V_mask, const Region& region);

struct ContractExpand {
  Check contract;      // max distance of a V node outside Ū to D̄; ok iff <= h
  Check expand_nodes;  // count of Ū∩D nodes > 2h from ∂U missing from V
  Check sing_support;  // min g over samples strictly inside D; ok iff > 1e-6
  bool contract_ok() const { return contract.ok; }
  bool expand_ok() const { return expand_nodes.ok && sing_support.ok; }
};
ContractExpand check_contract_expand(const NodeMask& V_mask, const std::vector<SingularPoint>& singular,
                                     const Region& region);

/// max |density - 1/π| over V nodes more than 3h from ∂V, ∂U and the box edge.
Check check_density_quantization(const RegularPart& regular, const Region& region);

struct WDiagnostic {
  ScalarField w;
  double eps = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  Check lower;     // w >= -eps
  Check upper;     // w <= (c1 - c2)/2 + eps; vacuous when c2 = -inf
  Check zero_set;  // |w| <= eps on D̄∩Ū, w > eps on nodes >= 6h away from it
  std::optional<Check> plateau;  // U not inside D: w = (c1-c2)/2 on V∖Ū ∩ D
};

/// w = H^{mu_0} - H - (1 - c1)/2 with eps = 10 h^2 (1 + c1 - c2) (c2 = -inf
/// uses 10 h^2 (1 + |c1|)).
WDiagnostic diagnostic_w(const ScalarField& H, const Region& region, double c1, double c2, const NodeMask& V_mask);

struct KktReport {
  double contact_dev_inside = 0.0;   // max |2H + |x|^2 - c1| on contact nodes in Ū
  double contact_dev_outside = 0.0;  // max |2H + |x|^2 - c2| on contact nodes outside Ū
  double lower_violation = 0.0;      // max (c_branch - 2H - |x|^2)_+
  double tolerance = 0.0;
  bool ok = false;
};
KktReport kkt_report(const VISolveResult& vi, const Region& region, double c1, double c2);

/// Nodewise distance between two fresh solves with fixed constants, one
/// seeded by max(0, ψ) and one by the far-field potential.
struct UniquenessReport {
  double max_difference = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};
UniquenessReport uniqueness_surrogate(const ObstacleSpec& spec, const Grid2D& grid, Point center,
                                      const PsorOptions& psor);

struct PropertyReport {
  Check gap;
  Check contract;
  Check expand_nodes;
  Check sing_support;
  Check density_quantization;
  Check mass_total;    // |mass_regular + mass_singular - 1|
  Check mass_closure;  // |mass on Ū - p|
  Check c1_gt_c2;      // margin c1 - c2
  double w_min = 0.0;
  double w_max = 0.0;
  double w_eps = 0.0;
  Check w_lower;
  Check w_upper;
  Check w_zero_set;
  std::optional<Check> w_plateau;
  KktReport kkt;
  std::optional<UniquenessReport> uniqueness;

  bool all_ok() const;
};

/// Structural checks on a calibrated solve. Mass checks use tol_closure;
/// the uniqueness surrogate is left empty (it needs two extra solves).
PropertyReport verify_properties(const Calibration& cal, const ExtractedMeasure& m, const Region& region,
                                 double tol_closure = 0.01);

}  // namespace equilib
