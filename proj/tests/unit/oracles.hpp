// Reference values computed independently of the library: closed forms and
// direct quadrature written against the definitions.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

template <class F>
double gk(F f, double a, double b, double tol = 1e-12) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

// -(1/π) ∫_D log|p - y| dy by rays from p: along direction θ the chord of D
// runs over ρ in [ρ0, ρ1] and ∫ ρ log ρ dρ has an antiderivative.
inline double circular_law_potential(double px, double py) {
  auto F = [](double r) { return r <= 0.0 ? 0.0 : r * r / 2.0 * std::log(r) - r * r / 4.0; };
  const double p2 = px * px + py * py;
  auto ray = [&](double th) {
    const double b = px * std::cos(th) + py * std::sin(th);
    const double disc = b * b - p2 + 1.0;
    if (disc <= 0.0) return 0.0;
    const double r1 = -b + std::sqrt(disc);
    const double r0 = std::max(0.0, -b - std::sqrt(disc));
    if (r1 <= 0.0) return 0.0;
    return F(r1) - F(r0);
  };
  return -gk(ray, 0.0, 2.0 * kPi, 1e-13) / kPi;
}

// ∫ log(w - t) σ(dt) for Im w > 0, closed form of the semicircle log transform.
inline std::complex<double> semicircle_log_transform(std::complex<double> w) {
  const std::complex<double> r2(std::numbers::sqrt2, 0.0);
  const std::complex<double> s = std::sqrt(w - r2) * std::sqrt(w + r2);
  return w * w / 2.0 - w * s / 2.0 + std::log(w + s) - 0.5 - kLn2;
}

// H^σ for σ on the imaginary axis: -∫ log|z - it| σ(dt) with z = (x, y).
inline double semicircle_potential(double x, double y) {
  const double ax = std::max(std::abs(x), 1e-15);
  return -std::real(semicircle_log_transform({y, ax}));
}

inline double semicircle_density(double y) {
  return std::abs(y) < std::numbers::sqrt2 ? std::sqrt(2.0 - y * y) / kPi : 0.0;
}

// σ([lo, hi]) from the antiderivative of the density.
inline double semicircle_mass(double lo, double hi) {
  auto cdf = [](double y) {
    const double r = std::numbers::sqrt2;
    y = std::clamp(y, -r, r);
    return (y * std::sqrt(std::max(0.0, 2.0 - y * y)) + 2.0 * std::asin(std::clamp(y / r, -1.0, 1.0))) / (2.0 * kPi) + 0.5;
  };
  return cdf(hi) - cdf(lo);
}

// Mean of -log|x - y| over two independent uniform points of the unit
// square, in closed form.
inline double cell_self_log() { return 25.0 / 12.0 - kPi / 3.0 - kLn2 / 3.0; }

}  // namespace oracle
