#pragma once

#include <vector>

#include "pack3d/sequence.hpp"
#include "pack3d/state.hpp"

namespace pack3d::testing {

inline Item box(int id, int l, int w, int h) { return Item::with_unit_density(id, Dims{l, w, h}); }

inline Placement placed(const Item& item, int x, int y, int z,
                        Orientation o = Orientation::kAsIs) {
  Placement p;
  p.item = item;
  p.o = o;
  p.x = x;
  p.y = y;
  p.z = z;
  return p;
}

/// Grows a pile by committing uniformly random placements that pass the
/// stability check in `mode`; stops at `count` items or when nothing fits.
inline PackingState random_pile(const BinConfig& bin, const ItemRegistry& reg, int count,
                                std::uint64_t seed,
                                StabilityMode mode = StabilityMode::kFullTree) {
  PackingState s(bin);
  Rng rng(seed);
  int misses = 0;
  int id = 0;
  while (id < count && misses < 2000) {
    const Dims d = reg.types[uniform_below(rng, reg.types.size())];
    const Item it = Item::with_unit_density(id, d);
    const Orientation o = kOrientations[uniform_below(rng, 2)];
    const Dims od = oriented(d, o);
    if (od.l > bin.length || od.w > bin.width) {
      ++misses;
      continue;
    }
    const Action a{static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.length - od.l + 1))),
                   static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.width - od.w + 1))),
                   o};
    if (s.feasible(it, a, mode)) {
      s.place(it, a, mode);
      ++id;
      misses = 0;
    } else {
      ++misses;
    }
  }
  return s;
}

}  // namespace pack3d::testing
