#include <cmath>
#include <numbers>

#include "doctest.h"
#include "equilib/halfspace.hpp"
#include "oracles.hpp"

using namespace equilib;

namespace {

// On the line: 2 H^sigma(0, y) + a^2 + y^2, from the closed-form log transform.
double lhs_oracle(double a, double b, double y) { return 2.0 * oracle::semicircle_potential(b - a, y) + b * b + y * y; }

// Derivative of Gbar in b, differentiated by hand from the closed form of
// H^sigma on the real axis.
double dgbar_oracle(double a, double b) { return 2.0 * (2.0 * b - a - std::sqrt(2.0 + (b - a) * (b - a))); }

}  // namespace

TEST_CASE("Euler-Lagrange constant on the line") {
  // 2 H^sigma(0) for the semicircle law.
  CHECK(std::abs(2.0 * oracle::semicircle_potential(0.0, 0.0) - kSemicircleConstant) < 1e-12);
  for (double a : {0.0, 0.5, 1.0, 2.0})
    for (int k = -40; k <= 40; ++k) {
      const double y = 0.05 * k;
      const double d = condition_lhs(a, a, y) - (a * a + kSemicircleConstant);
      CHECK(std::abs(condition_lhs(a, a, y) - lhs_oracle(a, a, y)) < 1e-8);
      if (std::abs(y) <= std::numbers::sqrt2)
        CHECK(std::abs(d) <= 1e-7);
      else
        CHECK(d >= -1e-7);
    }
}

TEST_CASE("condition off the line matches the closed form") {
  for (double a : {0.3, 1.0})
    for (double b : {a + 0.05, a + 0.7, a + 2.5})
      for (double y : {-3.0, -0.4, 0.0, 1.3})
        CHECK(std::abs(condition_lhs(a, b, y) - lhs_oracle(a, b, y)) < 1e-8);
}

TEST_CASE("F is the b-derivative of condition_lhs") {
  const double eps = 1e-5;
  double worst = 0.0;
  for (int ia = 0; ia < 10; ++ia)
    for (int ib = 0; ib < 10; ++ib)
      for (int iy = 0; iy < 5; ++iy) {
        const double a = 0.25 * ia;
        const double b = a + 0.06 + 0.3 * ib;
        const double y = -2.0 + 1.0 * iy;
        const double fd = (condition_lhs(a, b + eps, y) - condition_lhs(a, b - eps, y)) / (2.0 * eps);
        worst = std::max(worst, std::abs(F(a, b, y) - fd));
      }
  CHECK(worst <= 1e-5);
  CHECK_THROWS_AS(F(1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(F(1.0, 0.5, 0.0), DomainError);
}

TEST_CASE("Gbar derivative") {
  for (double a : {0.0, 0.7, 1.4, 2.0})
    for (double t : {0.1, 0.8, 1.5, 3.0}) {
      const double b = a + t;
      CHECK(F(a, b, 0.0) == doctest::Approx(dgbar_oracle(a, b)).epsilon(1e-9));
      const double fd = (Gbar(a, b + 1e-5) - Gbar(a, b - 1e-5)) / 2e-5;
      CHECK(std::abs(fd - dgbar_oracle(a, b)) <= 1e-5);
    }
  for (double a = 0.0; a <= 3.0; a += 0.25)
    for (double t = std::numbers::sqrt2; t <= 4.0; t += 0.2) CHECK(dgbar_oracle(a, a + t) > 0.0);
}

TEST_CASE("G is even in y") {
  for (double y : {0.1, 0.9, 1.7, 3.2}) CHECK(G(y, 1.0, 1.6) == doctest::Approx(G(-y, 1.0, 1.6)).epsilon(1e-12));
}

TEST_CASE("verdicts across the threshold") {
  const double set[] = {1.0, 1.2, 1.4, 1.4142, 1.5, 2.0};
  bool seen_true = false;
  for (double a : set) {
    const HalfspaceVerdict v = is_fully_singular(a);
    if (seen_true) CHECK(v.fully_singular);
    seen_true = seen_true || v.fully_singular;
    CHECK(v.worst_b > a);
    CHECK(v.worst_b <= a + 4.0);
    CHECK(std::abs(v.worst_y) <= 4.0);
    CHECK(G(v.worst_y, a, v.worst_b) == doctest::Approx(v.worst_margin).epsilon(1e-12));
  }
  CHECK_FALSE(is_fully_singular(1.0).fully_singular);
  CHECK_FALSE(is_fully_singular(1.4).fully_singular);
  CHECK(is_fully_singular(1.42).fully_singular);
  CHECK(is_fully_singular(std::numbers::sqrt2).worst_margin >= -1e-9);
}

TEST_CASE("worst margin below the threshold is at y = 0 near the line") {
  // Below sqrt 2 the condition fails first on the real axis just off the line.
  const HalfspaceVerdict v = is_fully_singular(1.0);
  CHECK(v.worst_y == doctest::Approx(0.0));
  CHECK(v.worst_margin < -0.05);
  // Independent minimum of Gbar over a fine b grid.
  double m = 1e300;
  for (double b = 1.0001; b <= 3.0; b += 1e-4) m = std::min(m, lhs_oracle(1.0, b, 0.0) - 1.0 - kSemicircleConstant);
  CHECK(std::abs(v.worst_margin - m) <= 1e-6);
}
