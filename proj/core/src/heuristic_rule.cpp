#include "pack3d/heuristic_rule.hpp"

namespace pack3d {

SupportStats support_stats(const HeightMap& hmap, const Rect& fp) {
  SupportStats s;
  s.z = hmap.support_height(fp);
  long long at_z = 0;
  for (int x = fp.x0; x < fp.x1; ++x) {
    for (int y = fp.y0; y < fp.y1; ++y) at_z += hmap.at(x, y) == s.z ? 1 : 0;
  }
  s.supported_fraction = static_cast<double>(at_z) / static_cast<double>(fp.area());
  const int xs[2] = {fp.x0, fp.x1 - 1};
  const int ys[2] = {fp.y0, fp.y1 - 1};
  for (int x : xs) {
    for (int y : ys) s.supported_corners += hmap.at(x, y) == s.z ? 1 : 0;
  }
  return s;
}

bool heuristic_rule_stable(const HeightMap& hmap, const Rect& footprint) {
  const SupportStats s = support_stats(hmap, footprint);
  if (s.z == 0) return true;
  if (s.supported_fraction > 0.60 && s.supported_corners == 4) return true;
  if (s.supported_fraction > 0.80 && s.supported_corners >= 3) return true;
  return s.supported_fraction > 0.95;
}

}  // namespace pack3d
