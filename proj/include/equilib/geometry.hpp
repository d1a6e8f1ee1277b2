#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace equilib {

/// A point of the plane, identified with the complex number x + iy.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double norm2(Point a) { return a.x * a.x + a.y * a.y; }

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// U = {Re z < -a}.
struct HalfPlane {
  double a = 0.0;
};

struct Disk {
  Point center;
  double radius = 1.0;
};

/// Closed, simple polygon. Vertices are stored counter-clockwise after
/// construction through make_polygon().
struct Polygon {
  std::vector<Point> vertices;
};

using Region = std::variant<HalfPlane, Disk, Polygon>;

/// Validates and normalizes a polygon (orientation made counter-clockwise).
/// Throws GeometryError for fewer than three vertices or zero area.
Polygon make_polygon(std::vector<Point> vertices);

/// Throws GeometryError when the region violates its invariants.
void validate(const Region& region);

std::string region_kind(const Region& region);

/// True for regions whose boundary is only piecewise smooth (polygons), so
/// the C^{1,1} boundary hypothesis holds only approximately.
bool approximate_hypothesis(const Region& region);

/// Membership in the open set U.
bool contains(const Region& region, Point pt);

/// Negative inside U, positive outside, zero on the boundary.
double signed_distance(const Region& region, Point pt);

/// Nearest point of the boundary together with the outward unit normal of U
/// there.
struct BoundaryProjection {
  Point foot;
  Point normal;
};
BoundaryProjection project_to_boundary(const Region& region, Point pt);

struct BoundarySample {
  Point position;
  double arc_weight = 0.0;  // length of the boundary element represented
  Point outward_normal;
};

/// Samples of the boundary ordered along it, with arc weights close to
/// `spacing`. The half-plane boundary line is truncated to |Im z| <= extent.
/// Throws GeometryError("boundary under-resolved") if spacing exceeds the
/// feature size of the region.
std::vector<BoundarySample> boundary_samples(const Region& region, double spacing,
                                             double extent = 4.0);

/// Area of the polygon (shoelace formula, signed: positive for CCW).
double signed_area(const std::vector<Point>& vertices);

/// mu_0(U) = area(U ∩ D) / pi for the unit disk D.
double circular_law_mass(const Region& region);

}  // namespace equilib
