#pragma once

#include <span>
#include <vector>

namespace pack3d {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// repeating the first vertex; collinear boundary points are dropped.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Closed containment test against a hull produced by convex_hull (which may
/// be degenerate: a single point or a segment). `slack` widens the hull.
bool hull_contains(std::span<const Point2> hull, Point2 p, double slack = 1e-9);

}  // namespace pack3d
