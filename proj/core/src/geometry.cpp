#include "pack3d/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pack3d {

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const Point2& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = points[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

double distance_to_segment(Point2 a, Point2 b, Point2 p) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point2 q = a + t * ab;
  return std::hypot(p.x - q.x, p.y - q.y);
}

}  // namespace

bool hull_contains(std::span<const Point2> hull, Point2 p, double slack) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(p.x - hull[0].x, p.y - hull[0].y) <= slack;
  if (hull.size() == 2) return distance_to_segment(hull[0], hull[1], p) <= slack;
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = hull[i];
    const Point2 b = hull[(i + 1) % n];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    // Signed distance of p to the left of edge a->b; inside is non-negative.
    if (cross(a, b, p) < -slack * len) return false;
  }
  return true;
}

}  // namespace pack3d
