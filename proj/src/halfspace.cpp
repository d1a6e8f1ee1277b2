#include "equilib/halfspace.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "equilib/parallel.hpp"

namespace equilib {

double condition_lhs(double a, double b, double y) {
  return 2.0 * semicircle_potential({b - a, y}) + b * b + y * y;
}

double F(double a, double b, double y) {
  if (!(b > a)) throw DomainError("F needs b > a");
  const std::complex<double> z(y, b - a);
  const std::complex<double> root = std::sqrt(z - kSemicircleEdge) * std::sqrt(z + kSemicircleEdge);
  return 2.0 * b + 2.0 * (z - root).imag();
}

double G(double y, double a, double b) { return condition_lhs(a, b, y) - a * a - kSemicircleConstant; }

double Gbar(double a, double b) { return G(0.0, a, b); }

// Scan box bound. For a >= 0, b >= a and r^2 = (b-a)^2 + y^2 we have
// b^2 - a^2 >= (b-a)^2 and H^sigma(z) >= -log(|z| + sqrt 2), so
//   G >= r^2 - 2 log(r + sqrt 2) - 1.70,
// which is increasing for r >= 1 and exceeds 10 once r >= 4. Outside
// (a, a+4] x [-4, 4] the margin is therefore positive.
HalfspaceVerdict is_fully_singular(double a, const HalfspaceScan& scan) {
  struct Best {
    double g;
    double b;
    double y;
  };
  auto sweep = [&](double b0, double b1, double y0, double y1, double step) {
    const int nb = static_cast<int>(std::lround((b1 - b0) / step));
    const int ny = static_cast<int>(std::lround((y1 - y0) / step));
    // G is even in y, so only y >= 0 is evaluated when the window is symmetric.
    const bool symmetric = y0 == -y1;
    const int j0 = symmetric ? ny / 2 : 0;
    std::vector<Best> per_row(static_cast<std::size_t>(nb) + 1, Best{INFINITY, 0.0, 0.0});
    chunked_for(per_row.size(), [&](std::size_t i) {
      const double b = b0 + static_cast<double>(i) * step;
      if (!(b > a)) return;
      Best best{INFINITY, b, 0.0};
      for (int j = j0; j <= ny; ++j) {
        const double y = y0 + j * step;
        const double g = G(y, a, b);
        if (g < best.g) best = {g, b, y};
      }
      per_row[i] = best;
    });
    Best best{INFINITY, 0.0, 0.0};
    for (const Best& r : per_row)
      if (r.g < best.g) best = r;
    return best;
  };

  Best best = sweep(a, a + scan.b_span, -scan.y_span, scan.y_span, scan.step);
  const double fine = scan.step / scan.refine;
  const double b_lo = std::max(a, best.b - scan.step);
  const Best refined = sweep(b_lo, best.b + scan.step, best.y - scan.step, best.y + scan.step, fine);
  if (refined.g < best.g) best = refined;
  return {best.g >= scan.threshold, best.g, best.b, best.y};
}

}  // namespace equilib
