#pragma once

// Stacking-tree stability analysis.
//
// Every packed item is a node. A node's support edges point down to the items
// (or the floor) its bottom face rests on; each edge carries the share of the
// node's group mass (own mass plus everything resting on it) that flows
// through that contact, and the first moment of that share about the origin.
// Placing an item only changes the nodes reachable downward from it, so a
// placement is checked by pushing flow deltas through that active subtree in
// decreasing placement order and re-testing each touched node's group
// centroid against its contact geometry.

#include <cstdint>
#include <span>
#include <vector>

#include "pack3d/geometry.hpp"
#include "pack3d/grid.hpp"

namespace pack3d {

inline constexpr int kFloor = -1;

enum class StabilityMode : std::uint8_t { kFullTree, kCurrentOnly };
enum class Verdict : std::uint8_t { kStable, kUnstable };

const char* to_string(StabilityMode mode);
StabilityMode stability_mode_from_string(const std::string& text);

struct ContactRegion {
  int supporter = kFloor;  // node index of the supporting item, or kFloor
  Rect rect;               // footprint intersected with the supporter's top face

  [[nodiscard]] Point2 contact_point() const {
    return {0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1)};
  }
  friend bool operator==(const ContactRegion&, const ContactRegion&) = default;
};

struct SupportEdge {
  ContactRegion region;
  double flow = 0.0;  // mass transmitted through this contact (g = 1)
  Point2 moment;      // flow times the point where it is applied
};

struct StackNode {
  int item_id = 0;
  Rect footprint;
  int z = 0;
  int top = 0;
  double own_mass = 0.0;
  Point2 own_centroid;
  double group_mass = 0.0;
  Point2 group_moment;  // sum of mass * planar position over the group
  std::vector<SupportEdge> supports;

  [[nodiscard]] Point2 group_centroid() const {
    return {group_moment.x / group_mass, group_moment.y / group_mass};
  }
};

/// Planar centroid of an oriented item dropped at (x, y).
inline Point2 footprint_centroid(const Rect& fp) {
  return {0.5 * (fp.x0 + fp.x1), 0.5 * (fp.y0 + fp.y1)};
}

/// True iff `centroid` lies in one region's rectangle or in the closed convex
/// hull of all region corners.
bool is_centroid_supported(Point2 centroid, std::span<const ContactRegion> regions,
                           double slack = 1e-9);

/// Splits `mass` over contact points so the shares balance the load at
/// `centroid`: a single point takes everything, two points follow the lever
/// law along their connecting line, and three or more solve a least-squares
/// system of one moment equation per pair (about the axis through the pair)
/// plus the total-force equation. Negative shares are clamped and the rest
/// rescaled; the returned flows always sum to `mass`. Coinciding points share
/// their combined flow equally.
void distribute_mass(double mass, Point2 centroid, std::span<const Point2> contact_points,
                     std::vector<double>& flows);
std::vector<double> distribute_mass(double mass, Point2 centroid,
                                    std::span<const Point2> contact_points);
std::vector<double> distribute_mass(double mass, Point2 centroid,
                                    std::span<const ContactRegion> regions);

class PropagationScratch;

class StackingTree {
 public:
  struct CheckResult {
    Verdict verdict = Verdict::kStable;
    int touched = 0;  // supporter nodes whose group changed
  };

  StackingTree() = default;

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool empty() const { return nodes_.empty(); }
  [[nodiscard]] const StackNode& node(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] const std::vector<StackNode>& nodes() const { return nodes_; }

  /// Contact regions for a footprint resting at height z; the floor when z=0.
  /// `z` must be the footprint's support height for the regions to be exact.
  void find_supports(const Rect& footprint, int z, std::vector<ContactRegion>& out) const;
  [[nodiscard]] std::vector<ContactRegion> find_supports(const Rect& footprint, int z) const;

  /// Evaluates a placement without modifying the tree.
  CheckResult check(const Placement& p, std::span<const ContactRegion> regions,
                    StabilityMode mode, PropagationScratch& scratch) const;
  CheckResult check(const Placement& p, std::span<const ContactRegion> regions,
                    StabilityMode mode) const;

  /// Evaluates and, when stable, commits the placement. An unstable
  /// placement leaves the tree untouched.
  CheckResult place(const Placement& p, std::span<const ContactRegion> regions,
                    StabilityMode mode, PropagationScratch& scratch);
  CheckResult place(const Placement& p, std::span<const ContactRegion> regions,
                    StabilityMode mode);

  /// Appends a node with its own support flows but no verdict and no
  /// propagation into the supporters. For replaying foreign layouts.
  void append_unchecked(const Placement& p, std::span<const ContactRegion> regions);

 private:
  void append_node(const Placement& p, std::span<const ContactRegion> regions,
                   std::span<const double> flows, std::span<const Point2> moments);

  std::vector<StackNode> nodes_;
  std::vector<std::vector<int>> by_top_;  // top height -> node indices
};

/// Reusable working memory for StackingTree::check. Not thread-safe; use one
/// per thread.
class PropagationScratch {
 public:
  PropagationScratch() = default;

 private:
  friend class StackingTree;

  struct Entry {
    int node = 0;
    double pending_mass = 0.0;
    Point2 pending_moment;
    double group_mass = 0.0;
    Point2 group_moment;
    std::vector<double> flows;
    std::vector<Point2> moments;
  };

  Entry& entry_for(const StackingTree& tree, int node);
  void reset(std::size_t node_count);

  std::vector<std::uint32_t> stamp_;
  std::vector<int> slot_;
  std::uint32_t epoch_ = 0;
  std::vector<Entry> entries_;
  std::size_t used_ = 0;
  std::vector<int> heap_;
  std::vector<Point2> points_;
  std::vector<double> flows_;
  // New node's own support edges.
  std::vector<double> new_flows_;
  std::vector<Point2> new_moments_;
};

struct RecomputeResult {
  StackingTree tree;
  HeightMap hmap;
  Verdict verdict = Verdict::kStable;
};

/// Replays placements from an empty bin. Stops at the first unstable one.
RecomputeResult full_recompute(const BinConfig& bin, std::span<const Placement> placements,
                               StabilityMode mode);

}  // namespace pack3d
