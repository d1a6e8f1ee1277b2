#include "equilib/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace equilib {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_closed_U(const Region& region, const Grid2D& grid, Point x) {
  return signed_distance(region, x) <= kClosureSlack * grid.h();
}

bool region_inside_unit_disk(const Region& region) {
  if (const auto* d = std::get_if<Disk>(&region)) return norm(d->center) + d->radius <= 1.0;
  if (const auto* p = std::get_if<Polygon>(&region)) {
    return std::all_of(p->vertices.begin(), p->vertices.end(), [](Point v) { return norm(v) <= 1.0; });
  }
  return false;
}

// f'(0) from samples at t = h, 2h, 3h (quadratic through the three).
double one_sided_derivative(double f1, double f2, double f3, double h) { return (-2.5 * f1 + 4.0 * f2 - 1.5 * f3) / h; }

}  // namespace

RegularPart extract_regular(const ScalarField& H, const Region& region) {
  const Grid2D& g = H.grid;
  const int n = g.n();
  const double h = g.h();
  ScalarField raw(g);
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) {
      const double rho = neg_laplacian(H, i, j) / (2.0 * pi);
      raw(i, j) = rho > kDensityFloor ? rho : 0.0;
    }

  RegularPart out{raw, NodeMask(g), NodeMask(g)};
  std::vector<double> sd(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    sd[k] = signed_distance(region, g.node(k));
    out.band.values[k] = std::abs(sd[k]) < kBandCells * h ? 1 : 0;
  }
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const std::size_t k = g.index(i, j);
      if (!out.band.values[k]) continue;
      const BoundaryProjection proj = project_to_boundary(region, g.node(i, j));
      const double side = sd[k] > kClosureSlack * h ? 1.0 : -1.0;
      const Point q = proj.foot + (side * 2.5 * h) * proj.normal;
      const int qi = std::clamp(static_cast<int>(std::lround((q.x + g.box_radius()) / h)), 1, n - 2);
      const int qj = std::clamp(static_cast<int>(std::lround((q.y + g.box_radius()) / h)), 1, n - 2);
      const std::size_t qk = g.index(qi, qj);
      out.density.values[k] = out.band.values[qk] ? 0.0 : raw.values[qk];
    }
  }
  for (std::size_t k = 0; k < g.size(); ++k) out.V_mask.values[k] = out.density.values[k] > 1.0 / (2.0 * pi) ? 1 : 0;
  return out;
}

std::vector<BoundarySample> singular_samples(const Region& region, const Grid2D& grid) {
  const double h = grid.h();
  return boundary_samples(region, h, grid.box_radius() - 4.0 * h);
}

std::vector<double> extract_singular(const ScalarField& H, const Region& region,
                                     const std::vector<BoundarySample>& samples, int* clamped) {
  (void)region;
  const Grid2D& g = H.grid;
  const double h = g.h();
  const double limit = g.box_radius() - h;
  std::vector<double> out;
  out.reserve(samples.size());
  int negatives = 0;
  for (const BoundarySample& s : samples) {
    if (s.arc_weight > 2.0 * h * (1.0 + 1e-9)) throw std::invalid_argument("boundary samples coarser than 2h");
    const Point nu = s.outward_normal;
    double in[3];
    double out_side[3];
    for (int k = 0; k < 3; ++k) {
      const double t = (k + 1) * h;
      const Point a = s.position - t * nu;
      const Point b = s.position + t * nu;
      for (Point p : {a, b})
        if (std::abs(p.x) > limit || std::abs(p.y) > limit)
          throw std::invalid_argument("boundary sample too close to the box edge");
      in[k] = H.interpolate(a);
      out_side[k] = H.interpolate(b);
    }
    const double d_in = -one_sided_derivative(in[0], in[1], in[2], h);
    const double d_out = one_sided_derivative(out_side[0], out_side[1], out_side[2], h);
    double gval = (d_in - d_out) / (2.0 * pi);
    if (gval < 0.0) {
      ++negatives;
      gval = 0.0;
    }
    out.push_back(gval);
  }
  if (clamped) *clamped = negatives;
  return out;
}

ExtractedMeasure extract_measure(const ScalarField& H, const Region& region) {
  const Grid2D& g = H.grid;
  ExtractedMeasure m{extract_regular(H, region), {}, 0.0, 0.0, 0.0, 0};
  const std::vector<BoundarySample> samples = singular_samples(region, g);
  const std::vector<double> gv = extract_singular(H, region, samples, &m.clamped_samples);
  double s = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    m.singular.push_back({samples[k], s + samples[k].arc_weight / 2.0, gv[k]});
    s += samples[k].arc_weight;
    m.mass_singular += gv[k] * samples[k].arc_weight;
  }
  const double cell = g.h() * g.h();
  double in_U = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double mk = m.regular.density.values[k] * cell;
    if (mk == 0.0) continue;
    m.mass_regular += mk;
    if (in_closed_U(region, g, g.node(k))) in_U += mk;
  }
  m.mass_closure = in_U + m.mass_singular;
  return m;
}

DiscreteMeasure to_discrete_measure(const ExtractedMeasure& m) {
  const Grid2D& g = m.regular.density.grid;
  DiscreteMeasure mu(g);
  const double total = m.mass_regular + m.mass_singular;
  if (!(total > 0.0)) throw std::invalid_argument("extracted measure has no mass");
  const double scale = 1.0 / total;
  const double cell = g.h() * g.h();
  for (std::size_t k = 0; k < g.size(); ++k) mu.cell_masses[k] = m.regular.density.values[k] * cell * scale;
  for (const SingularPoint& p : m.singular)
    if (p.g > 0.0) mu.atoms.push_back({p.sample, p.g * p.sample.arc_weight * scale});
  return mu;
}

DiscreteMeasure nodal_measure(const ScalarField& H) {
  const Grid2D& g = H.grid;
  const int n = g.n();
  const double cell = g.h() * g.h();
  DiscreteMeasure mu(g);
  double total = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const double rho = neg_laplacian(H, i, j) / (2.0 * pi);
      if (rho <= kDensityFloor) continue;
      mu.cell_masses[g.index(i, j)] = rho * cell;
      total += rho * cell;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("potential carries no mass");
  for (double& m : mu.cell_masses) m /= total;
  return mu;
}

EnergyIdentity energy_identity(const ScalarField& H) {
  const Grid2D& g = H.grid;
  const DiscreteMeasure mu = nodal_measure(H);
  const DiscreteMeasure mu0 = discretize_circular_law(g);
  ScalarField potential(g);
  for (std::size_t k = 0; k < g.size(); ++k) potential.values[k] = H.values[k] - circular_law_potential(g.node(k));
  EnergyIdentity e;
  e.double_sum = logarithmic_energy(difference(mu, mu0));
  e.dirichlet = energy_via_dirichlet(mu, mu0, potential);
  e.relative = std::abs(e.dirichlet - e.double_sum) / std::abs(e.double_sum);
  e.ok = e.relative <= 0.02;
  return e;
}

Check check_gap(const NodeMask& V_mask, const Region& region) {
  const Grid2D& g = V_mask.grid;
  double margin = kInf;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!V_mask.values[k]) continue;
    const double sd = signed_distance(region, g.node(k));
    if (sd > kClosureSlack * g.h()) margin = std::min(margin, sd);
  }
  return {margin >= 2.0 * g.h() * (1.0 - 1e-9), margin};
}

ContractExpand check_contract_expand(const NodeMask& V_mask, const std::vector<SingularPoint>& singular,
                                     const Region& region) {
  const Grid2D& g = V_mask.grid;
  const double h = g.h();
  double outside = -kInf;
  int missing = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    const double sd = signed_distance(region, x);
    if (V_mask.values[k] && sd > kClosureSlack * h) outside = std::max(outside, norm(x) - 1.0);
    if (!V_mask.values[k] && sd < -2.0 * h && norm(x) < 1.0) ++missing;
  }
  double min_g = kInf;
  for (const SingularPoint& p : singular)
    if (norm(p.sample.position) < 1.0) min_g = std::min(min_g, p.g);
  ContractExpand r;
  r.contract = {outside <= h, outside};
  r.expand_nodes = {missing == 0, static_cast<double>(missing)};
  r.sing_support = {min_g > 1e-6, min_g};
  return r;
}

Check check_density_quantization(const RegularPart& regular, const Region& region) {
  const Grid2D& g = regular.density.grid;
  const int n = g.n();
  const double h = g.h();
  const int r = 3;
  double worst = 0.0;
  for (int j = r; j < n - r; ++j) {
    for (int i = r; i < n - r; ++i) {
      if (!regular.V_mask(i, j)) continue;
      if (std::abs(signed_distance(region, g.node(i, j))) <= 3.0 * h) continue;
      bool interior = true;
      for (int dj = -r; dj <= r && interior; ++dj)
        for (int di = -r; di <= r; ++di)
          if (di * di + dj * dj <= r * r && !regular.V_mask(i + di, j + dj)) {
            interior = false;
            break;
          }
      if (!interior) continue;
      worst = std::max(worst, std::abs(regular.density(i, j) - 1.0 / pi));
    }
  }
  return {worst <= 0.02, worst};
}

WDiagnostic diagnostic_w(const ScalarField& H, const Region& region, double c1, double c2, const NodeMask& V_mask) {
  const Grid2D& g = H.grid;
  const int n = g.n();
  const double h = g.h();
  const bool finite_c2 = std::isfinite(c2);
  const double half_gap = finite_c2 ? 0.5 * (c1 - c2) : kInf;
  WDiagnostic d{ScalarField(g), 10.0 * h * h * (finite_c2 ? 1.0 + c1 - c2 : 1.0 + std::abs(c1)), kInf, -kInf,
                {}, {}, {}, std::nullopt};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) d.w(i, j) = circular_law_potential(g.node(i, j)) - H(i, j) - 0.5 * (1.0 - c1);

  const bool check_plateau = finite_c2 && !region_inside_unit_disk(region);
  double zero_dev = 0.0;
  double far_min = kInf;
  double plateau_dev = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const Point x = g.node(i, j);
      const double w = d.w(i, j);
      d.w_min = std::min(d.w_min, w);
      d.w_max = std::max(d.w_max, w);
      const double sd = signed_distance(region, x);
      const double r = norm(x);
      if (r <= 1.0 + 1e-12 && sd <= kClosureSlack * h) {
        zero_dev = std::max(zero_dev, std::abs(w));
      } else if (std::max(r - 1.0, sd) >= 6.0 * h) {
        far_min = std::min(far_min, w);
      }
      if (check_plateau && sd > 2.0 * h && r < 1.0 - 2.0 * h && V_mask(i, j) && V_mask(i - 1, j) && V_mask(i + 1, j) &&
          V_mask(i, j - 1) && V_mask(i, j + 1))
        plateau_dev = std::max(plateau_dev, std::abs(w - half_gap));
    }
  }
  d.lower = {d.w_min >= -d.eps, d.w_min + d.eps};
  d.upper = finite_c2 ? Check{d.w_max <= half_gap + d.eps, half_gap + d.eps - d.w_max} : Check{true, kInf};
  const double zero_margin = std::min(d.eps - zero_dev, far_min - d.eps);
  d.zero_set = {d.eps - zero_dev >= 0.0 && far_min > d.eps, zero_margin};
  if (check_plateau) d.plateau = Check{plateau_dev <= d.eps, d.eps - plateau_dev};
  return d;
}

KktReport kkt_report(const VISolveResult& vi, const Region& region, double c1, double c2) {
  const ScalarField& H = vi.H;
  const Grid2D& g = H.grid;
  const int n = g.n();
  KktReport r;
  const double contact_tol = 1e-6 * (std::isfinite(c2) ? c1 - c2 + 1.0 : 1.0 + std::abs(c1));
  r.tolerance = 2.0 * contact_tol + 1e-12;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const Point x = g.node(i, j);
      const double phi = 2.0 * H(i, j) + norm2(x);
      const bool inside = in_closed_U(region, g, x);
      const double c = inside ? c1 : c2;
      if (std::isfinite(c)) r.lower_violation = std::max(r.lower_violation, c - phi);
      if (!vi.contact_mask(i, j)) continue;
      if (inside) {
        r.contact_dev_inside = std::max(r.contact_dev_inside, std::abs(phi - c1));
      } else if (std::isfinite(c2)) {
        r.contact_dev_outside = std::max(r.contact_dev_outside, std::abs(phi - c2));
      }
    }
  }
  r.ok = r.contact_dev_inside <= r.tolerance && r.contact_dev_outside <= r.tolerance && r.lower_violation <= 1e-12;
  return r;
}

UniquenessReport uniqueness_surrogate(const ObstacleSpec& spec, const Grid2D& grid, Point center,
                                      const PsorOptions& psor) {
  const ScalarField psi = build_obstacle(spec, grid);
  const DirichletData dir = far_field_dirichlet(grid, center);
  const ScalarField zero(grid);
  const ScalarField far = far_field_extension(grid, center);
  const VISolveResult a = solve_vi(psi, dir, psor, &zero);
  const VISolveResult b = solve_vi(psi, dir, psor, &far);
  UniquenessReport r;
  for (std::size_t k = 0; k < grid.size(); ++k)
    r.max_difference = std::max(r.max_difference, std::abs(a.H.values[k] - b.H.values[k]));
  r.tolerance = 10.0 * psor.tol;
  r.ok = a.converged && b.converged && r.max_difference <= r.tolerance;
  return r;
}

bool PropertyReport::all_ok() const {
  bool ok = gap.ok && contract.ok && expand_nodes.ok && sing_support.ok && density_quantization.ok && mass_total.ok &&
            mass_closure.ok && c1_gt_c2.ok && w_lower.ok && w_upper.ok && w_zero_set.ok && kkt.ok;
  if (w_plateau) ok = ok && w_plateau->ok;
  if (uniqueness) ok = ok && uniqueness->ok;
  return ok;
}

PropertyReport verify_properties(const Calibration& cal, const ExtractedMeasure& m, const Region& region,
                                 double tol_closure) {
  PropertyReport r;
  r.gap = check_gap(m.regular.V_mask, region);
  const ContractExpand ce = check_contract_expand(m.regular.V_mask, m.singular, region);
  r.contract = ce.contract;
  r.expand_nodes = ce.expand_nodes;
  r.sing_support = ce.sing_support;
  r.density_quantization = check_density_quantization(m.regular, region);
  const double total_dev = std::abs(m.mass_regular + m.mass_singular - 1.0);
  r.mass_total = {total_dev <= tol_closure, total_dev};
  const double closure_dev = std::abs(m.mass_closure - cal.p);
  r.mass_closure = {closure_dev <= tol_closure, closure_dev};
  const double gap_c = cal.c1 - cal.c2;
  r.c1_gt_c2 = {gap_c > 0.0, gap_c};
  const WDiagnostic wd = diagnostic_w(cal.vi.H, region, cal.c1, cal.c2, m.regular.V_mask);
  r.w_min = wd.w_min;
  r.w_max = wd.w_max;
  r.w_eps = wd.eps;
  r.w_lower = wd.lower;
  r.w_upper = wd.upper;
  r.w_zero_set = wd.zero_set;
  r.w_plateau = wd.plateau;
  r.kkt = kkt_report(cal.vi, region, cal.c1, cal.c2);
  return r;
}

}  // namespace equilib
