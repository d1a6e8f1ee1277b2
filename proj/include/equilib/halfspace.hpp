#pragma once

#include "equilib/geometry.hpp"
#include "equilib/potential.hpp"

namespace equilib {

// Half-space U_a = {x < -a}. The candidate concentrated measure is the
// semicircle law on the boundary line; a point at transverse offset b - a
// from the line and height y is z = (b - a, y) in the convention of
// semicircle_potential.

/// 2 H^sigma(b - a, y) + b^2 + y^2 (quadrature).
double condition_lhs(double a, double b, double y);

/// ∂/∂b of condition_lhs in closed form: 2b + 2 Im(z - sqrt(z^2 - 2)) with
/// z = y + i(b - a). Throws DomainError unless b > a.
double F(double a, double b, double y);

/// condition_lhs(a, b, y) - a^2 - kSemicircleConstant.
double G(double y, double a, double b);
double Gbar(double a, double b);

struct HalfspaceVerdict {
  bool fully_singular = false;
  double worst_margin = 0.0;
  double worst_b = 0.0;
  double worst_y = 0.0;
};

struct HalfspaceScan {
  double b_span = 4.0;   // b in (a, a + b_span]
  double y_span = 4.0;   // y in [-y_span, y_span]
  double step = 0.01;
  int refine = 10;       // refinement factor around the worst point
  double threshold = -1e-9;
};

/// Scans G over the box and refines around its minimum. Verdict: the minimum
/// is >= scan.threshold.
HalfspaceVerdict is_fully_singular(double a, const HalfspaceScan& scan = {});

}  // namespace equilib
