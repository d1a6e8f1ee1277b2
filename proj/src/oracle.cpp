#include "equilib/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "equilib/obstacle.hpp"
#include "equilib/potential.hpp"

namespace equilib {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxOracleNodes = 48;

// Quadratic energy m^T K m + q^T m over a product of two scaled simplices.
struct Problem {
  std::size_t N = 0;
  std::vector<double> K;  // dense, row-major
  std::vector<double> q;
  std::vector<unsigned char> part;  // 1 = Ū
  double target[2] = {0.0, 0.0};    // mass of partition 0 (outside) and 1 (Ū)

  double k(std::size_t i, std::size_t j) const { return K[i * N + j]; }
};

struct Run {
  std::vector<double> m;
  double energy = 0.0;
  double gap = 0.0;
  bool monotone = true;
  double max_increase = 0.0;
  std::vector<double> trace;
};

std::vector<double> gradient(const Problem& pr, const std::vector<double>& m) {
  std::vector<double> phi(pr.N);
  for (std::size_t i = 0; i < pr.N; ++i) {
    double s = 0.0;
    const double* row = &pr.K[i * pr.N];
    for (std::size_t j = 0; j < pr.N; ++j) s += row[j] * m[j];
    phi[i] = 2.0 * s + pr.q[i];
  }
  return phi;
}

double energy_of(const Problem& pr, const std::vector<double>& m, const std::vector<double>& phi) {
  // m^T K m + q^T m = (m^T phi + q^T m) / 2
  double e = 0.0;
  for (std::size_t i = 0; i < pr.N; ++i) e += m[i] * (phi[i] + pr.q[i]);
  return 0.5 * e;
}

double partition_gap(const Problem& pr, const std::vector<double>& m, const std::vector<double>& phi, int P) {
  double lo = kInf;
  for (std::size_t i = 0; i < pr.N; ++i)
    if (pr.part[i] == P) lo = std::min(lo, phi[i]);
  double g = 0.0;
  for (std::size_t i = 0; i < pr.N; ++i)
    if (pr.part[i] == P) g += m[i] * (phi[i] - lo);
  return g;
}

Run frank_wolfe(const Problem& pr, std::vector<double> m, const OracleOptions& opt) {
  Run run;
  std::vector<double> phi = gradient(pr, m);
  double energy = energy_of(pr, m, phi);
  run.trace.push_back(energy);
  for (int it = 0; it < opt.iters; ++it) {
    if (opt.rule == StepRule::OpenLoop) {
      const double gamma = 2.0 / (it + 2.0);
      std::size_t s[2] = {0, 0};
      double best[2] = {kInf, kInf};
      for (std::size_t i = 0; i < pr.N; ++i) {
        const int P = pr.part[i];
        if (phi[i] < best[P]) {
          best[P] = phi[i];
          s[P] = i;
        }
      }
      for (std::size_t i = 0; i < pr.N; ++i) {
        phi[i] = (1.0 - gamma) * (phi[i] - pr.q[i]) + pr.q[i];
        for (int P = 0; P < 2; ++P)
          if (pr.target[P] > 0.0) phi[i] += 2.0 * gamma * pr.target[P] * pr.k(i, s[P]);
        m[i] *= 1.0 - gamma;
      }
      for (int P = 0; P < 2; ++P)
        if (pr.target[P] > 0.0) m[s[P]] += gamma * pr.target[P];
    } else {
      for (int P = 0; P < 2; ++P) {
        if (pr.target[P] <= 0.0) continue;
        std::size_t s = pr.N;
        std::size_t t = pr.N;
        for (std::size_t i = 0; i < pr.N; ++i) {
          if (pr.part[i] != P) continue;
          if (s == pr.N || phi[i] < phi[s]) s = i;
          if (m[i] > 0.0 && (t == pr.N || phi[i] > phi[t])) t = i;
        }
        if (s == t || t == pr.N) continue;
        const double curvature = 2.0 * (pr.k(s, s) + pr.k(t, t) - 2.0 * pr.k(s, t));
        const double gamma = std::clamp((phi[t] - phi[s]) / curvature, 0.0, m[t]);
        if (gamma <= 0.0) continue;
        m[s] += gamma;
        m[t] = (gamma == m[t]) ? 0.0 : m[t] - gamma;
        const double* ks = &pr.K[s * pr.N];
        const double* kt = &pr.K[t * pr.N];
        for (std::size_t i = 0; i < pr.N; ++i) phi[i] += 2.0 * gamma * (ks[i] - kt[i]);
      }
    }
    const double e = energy_of(pr, m, phi);
    if (it >= 10 && e > energy + 1e-9) {
      run.monotone = false;
      run.max_increase = std::max(run.max_increase, e - energy);
    }
    energy = e;
    if ((it + 1) % 100 == 0) run.trace.push_back(energy);
  }
  // Recompute the gradient from scratch so accumulated update error does not
  // leak into the reported gap and energy.
  phi = gradient(pr, m);
  run.energy = energy_of(pr, m, phi);
  run.gap = 0.0;
  for (int P = 0; P < 2; ++P)
    if (pr.target[P] > 0.0) run.gap = std::max(run.gap, partition_gap(pr, m, phi, P));
  run.m = std::move(m);
  return run;
}

Problem grid_problem(const SimplexMeasure& mu) {
  const Grid2D& g = mu.grid;
  const int n = g.n();
  const double h = g.h();
  Problem pr;
  pr.N = g.size();
  pr.K.resize(pr.N * pr.N);
  for (std::size_t a = 0; a < pr.N; ++a) {
    const int ai = static_cast<int>(a % n);
    const int aj = static_cast<int>(a / n);
    for (std::size_t b = 0; b < pr.N; ++b) {
      const int di = std::abs(static_cast<int>(b % n) - ai);
      const int dj = std::abs(static_cast<int>(b / n) - aj);
      pr.K[a * pr.N + b] = (di == 0 && dj == 0) ? -std::log(h) + kCellSelfLogConstant : -std::log(h * std::hypot(di, dj));
    }
  }
  pr.q.resize(pr.N);
  for (std::size_t k = 0; k < pr.N; ++k) pr.q[k] = norm2(g.node(k));
  pr.part = mu.inside;
  pr.target[1] = mu.p;
  pr.target[0] = 1.0 - mu.p;
  return pr;
}

void check_coarse(const Grid2D& grid) {
  if (grid.n() > kMaxOracleNodes) throw std::invalid_argument("oracle grids are limited to 48 nodes per side");
}

}  // namespace

double SimplexMeasure::partition_mass(bool in) const {
  double s = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k)
    if ((inside[k] != 0) == in) s += masses[k];
  return s;
}

SimplexMeasure uniform_measure(const Region& region, double p, const Grid2D& grid) {
  check_coarse(grid);
  SimplexMeasure mu(grid);
  mu.p = p;
  std::size_t count[2] = {0, 0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    mu.inside[k] = in_closure(region, grid, grid.node(k)) ? 1 : 0;
    ++count[mu.inside[k]];
  }
  const double target[2] = {1.0 - p, p};
  for (int P = 0; P < 2; ++P)
    if (target[P] > 0.0 && count[P] == 0) throw std::invalid_argument("a partition that must carry mass has no nodes");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int P = mu.inside[k];
    mu.masses[k] = target[P] > 0.0 ? target[P] / static_cast<double>(count[P]) : 0.0;
  }
  return mu;
}

std::vector<double> effective_potential(const SimplexMeasure& mu) {
  check_coarse(mu.grid);
  return gradient(grid_problem(mu), mu.masses);
}

double discrete_energy(const SimplexMeasure& mu) {
  check_coarse(mu.grid);
  const Problem pr = grid_problem(mu);
  return energy_of(pr, mu.masses, gradient(pr, mu.masses));
}

OracleResult direct_minimize(const Region& region, double p, const Grid2D& grid, const OracleOptions& options) {
  validate(region);
  const double mu0 = circular_law_mass(region);
  if (!(p > mu0) || p > 1.0) throw std::invalid_argument("p must satisfy mu_0(U) < p <= 1");
  if (options.iters < 1000) throw std::invalid_argument("the oracle needs at least 1000 iterations");
  SimplexMeasure mu = uniform_measure(region, p, grid);
  const Problem pr = grid_problem(mu);
  Run run = frank_wolfe(pr, mu.masses, options);
  mu.masses = std::move(run.m);
  return {std::move(mu), run.energy, run.gap, run.monotone, run.max_increase, std::move(run.trace)};
}

KktEstimate kkt_check(const SimplexMeasure& mu) {
  const std::vector<double> phi = effective_potential(mu);
  double weighted[2] = {0.0, 0.0};
  double mass[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < phi.size(); ++k) {
    weighted[mu.inside[k]] += mu.masses[k] * phi[k];
    mass[mu.inside[k]] += mu.masses[k];
  }
  KktEstimate r;
  r.c1_est = mass[1] > 0.0 ? weighted[1] / mass[1] : -kInf;
  r.c2_est = mass[0] > 0.0 ? weighted[0] / mass[0] : -kInf;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double c = mu.inside[k] ? r.c1_est : r.c2_est;
    if (std::isfinite(c)) r.max_violation = std::max(r.max_violation, c - phi[k]);
  }
  return r;
}

SimplexMeasure rasterize(const ExtractedMeasure& m, const Region& region, double p, const Grid2D& coarse) {
  check_coarse(coarse);
  SimplexMeasure out(coarse);
  out.p = p;
  for (std::size_t k = 0; k < coarse.size(); ++k) out.inside[k] = in_closure(region, coarse, coarse.node(k)) ? 1 : 0;
  const int n = coarse.n();
  const double R = coarse.box_radius();
  const double hc = coarse.h();

  auto deposit = [&](Point x, bool in, double mass) {
    const int ci = std::clamp(static_cast<int>(std::lround((x.x + R) / hc)), 0, n - 1);
    const int cj = std::clamp(static_cast<int>(std::lround((x.y + R) / hc)), 0, n - 1);
    std::size_t best = coarse.size();
    double best_d = kInf;
    for (int r = 0; r <= n && best == coarse.size(); ++r) {
      for (int j = std::max(0, cj - r); j <= std::min(n - 1, cj + r); ++j) {
        for (int i = std::max(0, ci - r); i <= std::min(n - 1, ci + r); ++i) {
          const std::size_t k = coarse.index(i, j);
          if ((out.inside[k] != 0) != in) continue;
          const double d = norm2(coarse.node(k) - x);
          if (d < best_d) {
            best_d = d;
            best = k;
          }
        }
      }
    }
    if (best == coarse.size()) throw std::invalid_argument("no coarse node in the partition");
    out.masses[best] += mass;
  };

  // Fine cells are split over the coarse cells they overlap; each piece goes
  // to the nearest coarse node of the fine cell's own partition.
  const Grid2D& fine = m.regular.density.grid;
  const double hf = fine.h();
  auto overlaps = [&](double c) {
    std::vector<std::pair<double, double>> parts;  // (coarse cell centre, length)
    const double lo = c - hf / 2.0;
    const double hi = c + hf / 2.0;
    const int i0 = static_cast<int>(std::floor((lo + R) / hc + 0.5));
    const int i1 = static_cast<int>(std::floor((hi + R) / hc + 0.5));
    for (int i = i0; i <= i1; ++i) {
      const double centre = -R + i * hc;
      const double len = std::min(hi, centre + hc / 2.0) - std::max(lo, centre - hc / 2.0);
      if (len > 0.0) parts.emplace_back(centre, len / hf);
    }
    return parts;
  };
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const double mass = m.regular.density.values[k] * hf * hf;
    if (mass <= 0.0) continue;
    const Point x = fine.node(k);
    const bool in = in_closure(region, fine, x);
    for (const auto& [cx, fx] : overlaps(x.x))
      for (const auto& [cy, fy] : overlaps(x.y)) deposit({cx, cy}, in, mass * fx * fy);
  }
  for (const SingularPoint& s : m.singular)
    if (s.g > 0.0) deposit(s.sample.position, true, s.g * s.sample.arc_weight);

  const double target[2] = {1.0 - p, p};
  double have[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < coarse.size(); ++k) have[out.inside[k]] += out.masses[k];
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const int P = out.inside[k];
    out.masses[k] = have[P] > 0.0 ? out.masses[k] * target[P] / have[P] : 0.0;
  }
  return out;
}

double l1_distance(const SimplexMeasure& a, const SimplexMeasure& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("measures live on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.masses.size(); ++k) s += std::abs(a.masses[k] - b.masses[k]);
  return s;
}

double semicircle_mass(double y0, double y1) {
  auto cdf = [](double t) {
    const double r = kSemicircleEdge;
    if (t <= -r) return 0.0;
    if (t >= r) return 1.0;
    return 0.5 + (t * std::sqrt(std::max(0.0, 2.0 - t * t)) / 2.0 + std::asin(t / r)) / std::numbers::pi;
  };
  return cdf(y1) - cdf(y0);
}

LineOracleResult direct_minimize_line(double a, int nodes, double extent, const OracleOptions& options) {
  if (nodes < 2 || !(extent > 0.0)) throw std::invalid_argument("line oracle needs >= 2 nodes and extent > 0");
  if (options.iters < 1000) throw std::invalid_argument("the oracle needs at least 1000 iterations");
  LineOracleResult out;
  out.width = 2.0 * extent / nodes;
  Problem pr;
  pr.N = static_cast<std::size_t>(nodes);
  for (int k = 0; k < nodes; ++k) out.y.push_back(-extent + (k + 0.5) * out.width);
  pr.K.resize(pr.N * pr.N);
  for (std::size_t i = 0; i < pr.N; ++i)
    for (std::size_t j = 0; j < pr.N; ++j)
      pr.K[i * pr.N + j] =
          i == j ? -std::log(out.width) + kSegmentSelfLogConstant : -std::log(std::abs(out.y[i] - out.y[j]));
  for (double y : out.y) pr.q.push_back(a * a + y * y);
  pr.part.assign(pr.N, 1);
  pr.target[1] = 1.0;
  Run run = frank_wolfe(pr, std::vector<double>(pr.N, 1.0 / nodes), options);
  out.masses = std::move(run.m);
  out.energy = run.energy;
  out.duality_gap = run.gap;
  return out;
}

}  // namespace equilib
