#pragma once

#include "pack3d/grid.hpp"

namespace pack3d {

/// Height-map stability rule of earlier packing work. A placement on the
/// floor is stable; otherwise it is stable when the cells at the support
/// height cover more than 60% of the footprint and all four bottom corners,
/// more than 80% and at least three corners, or more than 95% of the area.
bool heuristic_rule_stable(const HeightMap& hmap, const Rect& footprint);

struct SupportStats {
  int z = 0;
  double supported_fraction = 0.0;
  int supported_corners = 0;
};

SupportStats support_stats(const HeightMap& hmap, const Rect& footprint);

}  // namespace pack3d
