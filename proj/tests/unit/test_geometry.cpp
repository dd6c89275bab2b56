#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>

#include "pack3d/geometry.hpp"

using namespace pack3d;

namespace {

// Independent containment check: p is inside the closed convex hull of
// `pts` iff no line through two of the points separates p from all of them.
bool brute_contains(const std::vector<Point2>& pts, Point2 p) {
  const std::size_t n = pts.size();
  if (std::all_of(pts.begin(), pts.end(), [&](const Point2& q) { return q == pts[0]; })) {
    return pts[0] == p;
  }
  bool collinear = true;
  for (std::size_t i = 0; i < n && collinear; ++i) {
    for (std::size_t j = 0; j < n && collinear; ++j) {
      if (cross(pts[0], pts[i], pts[j]) != 0) collinear = false;
    }
  }
  if (collinear) {
    // On the segment spanned by the extreme points.
    Point2 lo = pts[0];
    Point2 hi = pts[0];
    for (const Point2& q : pts) {
      if (q.x < lo.x || (q.x == lo.x && q.y < lo.y)) lo = q;
      if (q.x > hi.x || (q.x == hi.x && q.y > hi.y)) hi = q;
    }
    if (cross(lo, hi, p) != 0) return false;
    return dot(p - lo, hi - lo) >= 0 && dot(p - hi, lo - hi) >= 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || pts[i] == pts[j]) continue;
      bool all_left = true;
      for (const Point2& q : pts) {
        if (cross(pts[i], pts[j], q) < 0) {
          all_left = false;
          break;
        }
      }
      // Supporting line with every point on its left: p must be too.
      if (all_left && cross(pts[i], pts[j], p) < 0) return false;
    }
  }
  return true;
}

std::string dump(const std::vector<Point2>& pts, Point2 p) {
  std::string s = " pts";
  for (const Point2& q : pts) s += " (" + std::to_string(q.x) + "," + std::to_string(q.y) + ")";
  return s + " p (" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

}  // namespace

TEST(ConvexHull, Square) {
  const auto hull = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 0}});
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_TRUE(hull_contains(hull, {1, 1}));
  EXPECT_TRUE(hull_contains(hull, {2, 1}));  // boundary counts
  EXPECT_TRUE(hull_contains(hull, {0, 0}));
  EXPECT_FALSE(hull_contains(hull, {2.001, 1}));
}

TEST(ConvexHull, Degenerate) {
  const auto point = convex_hull({{1, 1}, {1, 1}});
  EXPECT_TRUE(hull_contains(point, {1, 1}));
  EXPECT_FALSE(hull_contains(point, {1, 1.1}));
  const auto seg = convex_hull({{0, 0}, {4, 0}, {2, 0}});
  EXPECT_TRUE(hull_contains(seg, {3, 0}));
  EXPECT_FALSE(hull_contains(seg, {3, 0.1}));
  EXPECT_FALSE(hull_contains(seg, {4.1, 0}));
}

TEST(ConvexHull, AgreesWithHalfPlaneCheck) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(0, 8);
  std::uniform_int_distribution<int> count(1, 9);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Point2> pts(static_cast<std::size_t>(count(rng)));
    for (Point2& p : pts) p = {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))};
    const auto hull = convex_hull(pts);
    for (int q = 0; q < 10; ++q) {
      // Half-integer queries hit interiors and edges alike.
      const Point2 p{coord(rng) * 0.5 + 2, coord(rng) * 0.5 + 2};
      ASSERT_EQ(hull_contains(hull, p, 0.0), brute_contains(pts, p)) << "trial " << trial << dump(pts, p);
    }
  }
}
