#include <cmath>
#include <numbers>

#include "doctest.h"
#include "equilib/oracle.hpp"
#include "oracles.hpp"

using namespace equilib;
using doctest::Approx;

namespace {

const Disk kDiskCase{{0.8, 0.0}, 0.6};

double kernel(const Grid2D& g, std::size_t a, std::size_t b) {
  if (a == b) return -std::log(g.h()) + oracle::cell_self_log();
  return -std::log(norm(g.node(a) - g.node(b)));
}

// Double sum written out directly.
double energy_oracle(const SimplexMeasure& mu) {
  const Grid2D& g = mu.grid;
  double e = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    if (mu.masses[a] == 0.0) continue;
    e += mu.masses[a] * norm2(g.node(a));
    for (std::size_t b = 0; b < g.size(); ++b) e += mu.masses[a] * mu.masses[b] * kernel(g, a, b);
  }
  return e;
}

const OracleResult& disk_solution() {
  static const OracleResult r =
      direct_minimize(kDiskCase, 2.0 * circular_law_mass(kDiskCase), Grid2D(1.5, 33), OracleOptions{10000});
  return r;
}

}  // namespace

TEST_CASE("input validation") {
  const Grid2D g(1.5, 17);
  const double mu0 = circular_law_mass(kDiskCase);
  CHECK_THROWS_AS(direct_minimize(kDiskCase, mu0, g), std::invalid_argument);
  CHECK_THROWS_AS(direct_minimize(kDiskCase, 1.01, g), std::invalid_argument);
  CHECK_THROWS_AS(direct_minimize(kDiskCase, 0.5, g, OracleOptions{999}), std::invalid_argument);
  CHECK_THROWS_AS(direct_minimize(kDiskCase, 0.5, Grid2D(1.5, 49)), std::invalid_argument);
  // U = {x < -2} has no node of a box of radius 1.5.
  CHECK_THROWS_AS(direct_minimize(HalfPlane{2.0}, 0.5, g), std::invalid_argument);
}

TEST_CASE("uniform start splits the partitions") {
  const Grid2D g(1.5, 21);
  const SimplexMeasure mu = uniform_measure(kDiskCase, 0.4, g);
  CHECK(mu.partition_mass(true) == Approx(0.4).epsilon(1e-12));
  CHECK(mu.partition_mass(false) == Approx(0.6).epsilon(1e-12));
  for (std::size_t k = 0; k < g.size(); ++k)
    CHECK(static_cast<bool>(mu.inside[k]) == (signed_distance(kDiskCase, g.node(k)) <= 1e-9 * g.h()));
}

TEST_CASE("energy and effective potential against a direct double sum") {
  const Grid2D g(1.5, 13);
  SimplexMeasure mu = uniform_measure(kDiskCase, 0.5, g);
  for (std::size_t k = 0; k < g.size(); ++k) mu.masses[k] *= 1.0 + 0.3 * std::sin(1.7 * k);
  CHECK(discrete_energy(mu) == Approx(energy_oracle(mu)).epsilon(1e-12));
  const std::vector<double> phi = effective_potential(mu);
  for (std::size_t a = 0; a < g.size(); a += 7) {
    double v = norm2(g.node(a));
    for (std::size_t b = 0; b < g.size(); ++b) v += 2.0 * mu.masses[b] * kernel(g, a, b);
    CHECK(phi[a] == Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("Frank-Wolfe converges on the disk case") {
  const OracleResult& r = disk_solution();
  CHECK(r.monotone);
  CHECK(r.max_increase <= 1e-9);
  CHECK(r.duality_gap <= 1e-3 * std::abs(r.energy));
  CHECK(r.energy == Approx(discrete_energy(r.mu)).epsilon(1e-12));
  CHECK(std::abs(r.mu.partition_mass(true) - r.mu.p) <= 1e-12);
  CHECK(std::abs(r.mu.partition_mass(false) - (1.0 - r.mu.p)) <= 1e-12);
  for (double m : r.mu.masses) CHECK(m >= 0.0);
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k) CHECK(r.energy_trace[k] <= r.energy_trace[k - 1] + 1e-9);
  CHECK(r.energy < discrete_energy(uniform_measure(kDiskCase, r.mu.p, r.mu.grid)));

  const KktEstimate kkt = kkt_check(r.mu);
  CHECK(kkt.c1_est > kkt.c2_est);
  CHECK(kkt.max_violation <= 1e-2);
}

TEST_CASE("open-loop steps reach a comparable energy") {
  const Grid2D g(1.5, 17);
  const double p = 2.0 * circular_law_mass(kDiskCase);
  const OracleResult pw = direct_minimize(kDiskCase, p, g, OracleOptions{3000, StepRule::Pairwise});
  const OracleResult ol = direct_minimize(kDiskCase, p, g, OracleOptions{3000, StepRule::OpenLoop});
  CHECK(ol.energy >= pw.energy - 1e-6);
  CHECK(ol.energy - pw.energy <= 1e-2);
}

TEST_CASE("nearly unconstrained problem reproduces the circular-law energy") {
  // mu_0({x < 0}) = 1/2, so p slightly above 1/2 barely constrains.
  const OracleResult r = direct_minimize(HalfPlane{0.0}, 0.501, Grid2D(1.5, 33), OracleOptions{10000});
  CHECK(std::abs(r.energy - 0.75) <= 0.02);
}

TEST_CASE("p = 1 leaves the outer multiplier undefined") {
  const OracleResult r = direct_minimize(HalfPlane{0.0}, 1.0, Grid2D(1.5, 17), OracleOptions{2000});
  CHECK(r.mu.partition_mass(false) == 0.0);
  const KktEstimate k = kkt_check(r.mu);
  CHECK(std::isinf(k.c2_est));
  CHECK(k.c2_est < 0.0);
}

TEST_CASE("L1 distance") {
  const Grid2D g(1.5, 13);
  const SimplexMeasure a = uniform_measure(kDiskCase, 0.3, g);
  const SimplexMeasure b = uniform_measure(kDiskCase, 0.6, g);
  CHECK(l1_distance(a, a) == 0.0);
  CHECK(l1_distance(a, b) == Approx(l1_distance(b, a)));
  CHECK(l1_distance(a, b) == Approx(0.6));  // 0.3 moves in each partition
}

TEST_CASE("rasterized measures keep the partition totals") {
  const Grid2D fine(3.0, 121);
  ScalarField H(fine);
  for (int j = 0; j < fine.n(); ++j)
    for (int i = 0; i < fine.n(); ++i) H(i, j) = circular_law_potential(fine.node(i, j));
  const ExtractedMeasure m = extract_measure(H, kDiskCase);
  const double p = circular_law_mass(kDiskCase);
  const SimplexMeasure s = rasterize(m, kDiskCase, p, Grid2D(1.5, 33));
  CHECK(s.partition_mass(true) == Approx(p).epsilon(1e-12));
  CHECK(s.partition_mass(false) == Approx(1.0 - p).epsilon(1e-12));
  for (double v : s.masses) CHECK(v >= 0.0);
  // Only the O(h) stencil noise on the part of the boundary outside D lands
  // away from the unit disk.
  const double hc = s.grid.h();
  double far = 0.0;
  for (std::size_t k = 0; k < s.grid.size(); ++k)
    if (norm(s.grid.node(k)) > 1.0 + hc) far += s.masses[k];
  CHECK(far <= 0.1 * fine.h());
}

TEST_CASE("line oracle recovers the semicircle law") {
  const double a = 2.0;
  const LineOracleResult r = direct_minimize_line(a, 200, 2.0, OracleOptions{20000});
  double total = 0.0, l1 = 0.0;
  for (std::size_t k = 0; k < r.y.size(); ++k) {
    total += r.masses[k];
    l1 += std::abs(r.masses[k] - oracle::semicircle_mass(r.y[k] - r.width / 2.0, r.y[k] + r.width / 2.0));
  }
  CHECK(total == Approx(1.0).epsilon(1e-12));
  CHECK(l1 <= 0.03);
  // a^2 + 1/2 (second moment) + ln2/2 + 1/4 (log energy of sigma).
  CHECK(std::abs(r.energy - (a * a + 0.75 + std::numbers::ln2 / 2.0)) <= 1e-2);
  CHECK(r.duality_gap <= 1e-3 * r.energy);
}

TEST_CASE("semicircle interval masses") {
  CHECK(semicircle_mass(-2.0, 2.0) == Approx(1.0).epsilon(1e-12));
  CHECK(semicircle_mass(0.0, 5.0) == Approx(0.5).epsilon(1e-12));
  for (double y : {0.3, 0.9, 1.3})
    CHECK(semicircle_mass(0.0, y) == Approx(oracle::semicircle_mass(0.0, y)).epsilon(1e-10));
}
