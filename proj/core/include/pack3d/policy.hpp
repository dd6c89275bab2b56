#pragma once

// Packing policies over the (x, y, o) action encoding.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pack3d/env.hpp"

namespace pack3d {

struct PolicyDecision {
  Action action;
  int item_offset = 0;  // index into the lookahead window
  double score = 0.0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// Returns a mask-valid decision for the episode's current state.
  /// Throws NoFeasible when no lookahead item the policy may move fits.
  virtual PolicyDecision decide(const Episode& episode) = 0;
  [[nodiscard]] virtual bool reorders() const { return false; }
};

struct ScoredPlacement {
  Placement placement;
  double score = 0.0;  // step reward plus the evaluator of the next state
};

struct PlacementQuery {
  StabilityMode mode = StabilityMode::kFullTree;
  RewardParams params;
  double mass_scale = 1.0;
  /// Footprints the item must not overlap in plan.
  std::span<const Rect> avoid;
  /// Known masks for this item; when given no stability check is run.
  const std::array<FeasibilityMask, 2>* masks = nullptr;
};

/// The feasible placement maximizing step reward + evaluate_state(after),
/// ties broken by (o, y, x). Candidates are ranked on the height map first
/// and checked for stability lazily in rank order.
std::optional<ScoredPlacement> best_placement(const PackingState& state, const Item& item,
                                              const PlacementQuery& query);

/// Orientations worth trying: one for a square footprint.
std::vector<Orientation> distinct_orientations(const Dims& d);

struct PolicyOptions {
  std::uint64_t seed = 0;
  int mcts_m = 600;
  int mcts_clones = 1;
  std::string sampler = "normal";
};

std::unique_ptr<Policy> make_policy(const std::string& name, const PolicyOptions& options = {});
const std::vector<std::string>& policy_names();

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  [[nodiscard]] std::string name() const override { return "random"; }
  PolicyDecision decide(const Episode& episode) override;

 private:
  Rng rng_;
};

class GreedyPolicy final : public Policy {
 public:
  [[nodiscard]] std::string name() const override { return "greedy"; }
  PolicyDecision decide(const Episode& episode) override;
};

/// Side-by-side rule: lowest support, then smallest gap to a wall or an
/// occupied cell, then larger y, then smaller x.
class BoundaryPolicy final : public Policy {
 public:
  [[nodiscard]] std::string name() const override { return "boundary"; }
  PolicyDecision decide(const Episode& episode) override;
};

/// Deepest-bottom-left fill over the lookahead window: lowest resulting top,
/// then least surface irregularity, then smaller y, x.
class BphPolicy final : public Policy {
 public:
  explicit BphPolicy(bool allow_reorder) : reorder_(allow_reorder) {}
  [[nodiscard]] std::string name() const override { return reorder_ ? "bph-reorder" : "bph"; }
  PolicyDecision decide(const Episode& episode) override;
  [[nodiscard]] bool reorders() const override { return reorder_; }

 private:
  bool reorder_;
};

/// Gap between a footprint and the nearest wall or occupied cell outside it.
/// `occupied` is an (L+1) x (W+1) prefix-sum table of cells with height > 0.
int boundary_gap(const std::vector<int>& occupied, int length, int width, const Rect& fp);
std::vector<int> occupancy_prefix(const HeightMap& hmap);

/// Sum of |top - neighbor height| over cells bordering the footprint.
long long surface_irregularity(const HeightMap& hmap, const Rect& fp, int top);

}  // namespace pack3d
