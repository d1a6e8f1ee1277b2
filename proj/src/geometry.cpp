#include "equilib/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>
#include <numbers>

namespace equilib {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Closest point on segment [a, b] to p.
Point closest_on_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = norm2(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return a + t * ab;
}

int winding_number(const std::vector<Point>& v, Point p) {
  int wn = 0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && cross > 0.0) ++wn;
    } else {
      if (b.y <= p.y && cross < 0.0) --wn;
    }
  }
  return wn;
}

double polygon_signed_distance(const Polygon& poly, Point p) {
  const auto& v = poly.vertices;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point q = closest_on_segment(p, v[i], v[(i + 1) % v.size()]);
    best = std::min(best, norm(p - q));
  }
  if (best == 0.0) return 0.0;
  return winding_number(v, p) != 0 ? -best : best;
}

// Area of the disk of radius r centred at the origin intersected with the
// disk of radius s at distance d.
double lens_area(double r, double s, double d) {
  using std::numbers::pi;
  if (d >= r + s) return 0.0;
  if (d <= std::abs(r - s)) {
    const double m = std::min(r, s);
    return pi * m * m;
  }
  const double alpha = std::acos(std::clamp((d * d + r * r - s * s) / (2.0 * d * r), -1.0, 1.0));
  const double beta = std::acos(std::clamp((d * d + s * s - r * r) / (2.0 * d * s), -1.0, 1.0));
  return r * r * (alpha - std::sin(2.0 * alpha) / 2.0) + s * s * (beta - std::sin(2.0 * beta) / 2.0);
}

// Total length of {y : (x, y) in polygon, |y| <= cap}.
double polygon_slice_length(const std::vector<Point>& v, double x, double cap) {
  std::vector<double> ys;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    if ((a.x <= x && b.x > x) || (b.x <= x && a.x > x)) {
      const double t = (x - a.x) / (b.x - a.x);
      ys.push_back(a.y + t * (b.y - a.y));
    }
  }
  std::sort(ys.begin(), ys.end());
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < ys.size(); i += 2) {
    const double lo = std::max(ys[i], -cap);
    const double hi = std::min(ys[i + 1], cap);
    if (hi > lo) len += hi - lo;
  }
  return len;
}

double polygon_disk_area(const Polygon& poly) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> breaks{-1.0, 1.0};
  for (const Point& p : poly.vertices) {
    if (p.x > -1.0 && p.x < 1.0) breaks.push_back(p.x);
  }
  // Edge crossings of the unit circle produce kinks in the slice length.
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point d = v[(i + 1) % v.size()] - a;
    const double qa = norm2(d);
    const double qb = 2.0 * dot(a, d);
    const double qc = norm2(a) - 1.0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa == 0.0 || disc < 0.0) continue;
    for (double sgn : {-1.0, 1.0}) {
      const double t = (-qb + sgn * std::sqrt(disc)) / (2.0 * qa);
      if (t > 0.0 && t < 1.0) breaks.push_back(a.x + t * d.x);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] - breaks[i] < 1e-15) continue;
    auto f = [&](double x) {
      const double cap = std::sqrt(std::max(0.0, 1.0 - x * x));
      return polygon_slice_length(v, x, cap);
    };
    area += gauss_kronrod<double, 31>::integrate(f, breaks[i], breaks[i + 1], 12, 1e-12);
  }
  return area;
}

}  // namespace

double signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

Polygon make_polygon(std::vector<Point> vertices) {
  if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite polygon vertex");
  }
  const double area = signed_area(vertices);
  if (area == 0.0) throw GeometryError("polygon has zero area");
  if (area < 0.0) std::reverse(vertices.begin(), vertices.end());
  return Polygon{std::move(vertices)};
}

void validate(const Region& region) {
  std::visit(overloaded{
                 [](const HalfPlane& h) {
                   if (!std::isfinite(h.a)) throw GeometryError("half-plane offset must be finite");
                 },
                 [](const Disk& d) {
                   if (!(d.radius > 0.0) || !std::isfinite(d.radius))
                     throw GeometryError("disk radius must be positive");
                   if (!std::isfinite(d.center.x) || !std::isfinite(d.center.y))
                     throw GeometryError("disk center must be finite");
                 },
                 [](const Polygon& p) {
                   if (p.vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
                   if (!(signed_area(p.vertices) > 0.0))
                     throw GeometryError("polygon must be counter-clockwise with positive area");
                 },
             },
             region);
}

std::string region_kind(const Region& region) {
  return std::visit(overloaded{[](const HalfPlane&) { return std::string("halfplane"); },
                               [](const Disk&) { return std::string("disk"); },
                               [](const Polygon&) { return std::string("polygon"); }},
                    region);
}

bool approximate_hypothesis(const Region& region) {
  return std::holds_alternative<Polygon>(region);
}

double signed_distance(const Region& region, Point pt) {
  return std::visit(overloaded{[&](const HalfPlane& h) { return pt.x + h.a; },
                               [&](const Disk& d) { return norm(pt - d.center) - d.radius; },
                               [&](const Polygon& p) { return polygon_signed_distance(p, pt); }},
                    region);
}

bool contains(const Region& region, Point pt) { return signed_distance(region, pt) < 0.0; }

BoundaryProjection project_to_boundary(const Region& region, Point pt) {
  return std::visit(
      overloaded{
          [&](const HalfPlane& h) { return BoundaryProjection{{-h.a, pt.y}, {1.0, 0.0}}; },
          [&](const Disk& d) {
            Point r = pt - d.center;
            double len = norm(r);
            if (len == 0.0) {
              r = {1.0, 0.0};
              len = 1.0;
            }
            const Point n = (1.0 / len) * r;
            return BoundaryProjection{d.center + d.radius * n, n};
          },
          [&](const Polygon& p) {
            const auto& v = p.vertices;
            double best = std::numeric_limits<double>::infinity();
            BoundaryProjection out{};
            for (std::size_t i = 0; i < v.size(); ++i) {
              const Point a = v[i];
              const Point b = v[(i + 1) % v.size()];
              const Point q = closest_on_segment(pt, a, b);
              const double dist = norm(pt - q);
              if (dist < best) {
                best = dist;
                const Point e = b - a;
                const double len = norm(e);
                // Counter-clockwise orientation: outward normal is e rotated by -90°.
                out = {q, {e.y / len, -e.x / len}};
              }
            }
            return out;
          },
      },
      region);
}

std::vector<BoundarySample> boundary_samples(const Region& region, double spacing, double extent) {
  if (!(spacing > 0.0)) throw GeometryError("spacing must be positive");
  std::vector<BoundarySample> out;
  std::visit(overloaded{
                 [&](const HalfPlane& h) {
                   const double length = 2.0 * extent;
                   if (spacing > length) throw GeometryError("boundary under-resolved");
                   const auto k = static_cast<std::size_t>(std::max(1.0, std::round(length / spacing)));
                   const double w = length / static_cast<double>(k);
                   for (std::size_t i = 0; i < k; ++i) {
                     const double y = -extent + (static_cast<double>(i) + 0.5) * w;
                     out.push_back({{-h.a, y}, w, {1.0, 0.0}});
                   }
                 },
                 [&](const Disk& d) {
                   if (spacing > d.radius) throw GeometryError("boundary under-resolved");
                   const double perimeter = 2.0 * std::numbers::pi * d.radius;
                   const auto k = static_cast<std::size_t>(std::round(perimeter / spacing));
                   const double w = perimeter / static_cast<double>(k);
                   for (std::size_t i = 0; i < k; ++i) {
                     const double t = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(k);
                     const Point n{std::cos(t), std::sin(t)};
                     out.push_back({d.center + d.radius * n, w, n});
                   }
                 },
                 [&](const Polygon& p) {
                   const auto& v = p.vertices;
                   double shortest = std::numeric_limits<double>::infinity();
                   for (std::size_t i = 0; i < v.size(); ++i) shortest = std::min(shortest, norm(v[(i + 1) % v.size()] - v[i]));
                   if (spacing > shortest) throw GeometryError("boundary under-resolved");
                   for (std::size_t i = 0; i < v.size(); ++i) {
                     const Point a = v[i];
                     const Point e = v[(i + 1) % v.size()] - a;
                     const double len = norm(e);
                     const auto k = static_cast<std::size_t>(std::max(1.0, std::round(len / spacing)));
                     const double w = len / static_cast<double>(k);
                     const Point n{e.y / len, -e.x / len};
                     for (std::size_t j = 0; j < k; ++j) {
                       const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
                       out.push_back({a + t * e, w, n});
                     }
                   }
                 },
             },
             region);
  return out;
}

double circular_law_mass(const Region& region) {
  using std::numbers::pi;
  return std::visit(overloaded{
                        [](const HalfPlane& h) {
                          // Circular segment {x < -a} of the unit disk.
                          if (h.a >= 1.0) return 0.0;
                          if (h.a <= -1.0) return 1.0;
                          const double a = h.a;
                          return (std::acos(a) - a * std::sqrt(1.0 - a * a)) / pi;
                        },
                        [](const Disk& d) { return lens_area(1.0, d.radius, norm(d.center)) / pi; },
                        [](const Polygon& p) { return polygon_disk_area(p) / pi; },
                    },
                    region);
}

}  // namespace equilib
