#pragma once

// A packed bin: height map, stacking tree and the safe-volume index kept in
// step. Copyable, so search code can branch from snapshots.

#include <cstdint>
#include <optional>
#include <vector>

#include "pack3d/equilibrium.hpp"
#include "pack3d/grid.hpp"
#include "pack3d/stability.hpp"
#include "pack3d/vsafe.hpp"

namespace pack3d {

/// Per-orientation L x W bit grid of feasible FLB cells, X-major.
struct FeasibilityMask {
  int length = 0;
  int width = 0;
  Orientation o = Orientation::kAsIs;
  std::vector<std::uint8_t> bits;

  [[nodiscard]] bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(x) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(y)] != 0;
  }
  [[nodiscard]] int count() const;
  [[nodiscard]] bool any() const;
};

class PackingState {
 public:
  PackingState() = default;
  explicit PackingState(const BinConfig& bin);

  [[nodiscard]] const BinConfig& bin() const { return bin_; }
  [[nodiscard]] const HeightMap& hmap() const { return hmap_; }
  [[nodiscard]] const StackingTree& tree() const { return tree_; }
  [[nodiscard]] const SafeVolumeIndex& safe_index() const { return safe_; }
  [[nodiscard]] const std::vector<Placement>& placements() const { return placements_; }
  [[nodiscard]] long long packed_volume() const { return packed_volume_; }
  [[nodiscard]] double utilization() const {
    return static_cast<double>(packed_volume_) / static_cast<double>(bin_.volume());
  }

  /// The placement an action would produce, with z from the height map, or
  /// nothing if the footprint leaves the bin or the top exceeds H.
  [[nodiscard]] std::optional<Placement> locate(const Item& item, const Action& a) const;

  /// In bounds, fits under H and passes the stability check in `mode`.
  [[nodiscard]] bool feasible(const Item& item, const Action& a, StabilityMode mode) const;
  [[nodiscard]] StackingTree::CheckResult check(const Placement& p, StabilityMode mode) const;

  /// Feasibility of every FLB cell for one orientation. The height part uses
  /// a sliding-window maximum; stability is checked per surviving cell.
  [[nodiscard]] FeasibilityMask mask(const Item& item, Orientation o, StabilityMode mode) const;
  /// Height-only mask: in bounds and fits under H.
  [[nodiscard]] FeasibilityMask height_mask(const Item& item, Orientation o) const;
  /// Support height of every FLB cell for footprint l x w (-1 outside).
  [[nodiscard]] std::vector<int> support_heights(int l, int w) const;

  /// Commits a placement if feasible. `mass_scale` multiplies the item mass.
  /// Returns the verdict; an unstable or infeasible placement changes nothing.
  StackingTree::CheckResult place(const Item& item, const Action& a, StabilityMode mode,
                                  double mass_scale = 1.0);
  /// Commits a placement without any stability test (used for replays that
  /// must follow a recorded layout). Throws on bounds or height violations.
  void force_place(const Item& item, const Action& a, StabilityMode mode);

  [[nodiscard]] std::vector<Box> boxes() const { return boxes_of(tree_); }

 private:
  void commit(const Placement& p);

  BinConfig bin_;
  HeightMap hmap_;
  StackingTree tree_;
  SafeVolumeIndex safe_;
  std::vector<Placement> placements_;
  long long packed_volume_ = 0;
  mutable PropagationScratch scratch_;
  mutable std::vector<ContactRegion> regions_;
};

}  // namespace pack3d
