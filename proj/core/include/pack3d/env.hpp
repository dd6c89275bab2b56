#pragma once

// Sequential packing environment. Each step places the current item (or,
// for re-ordering policies, one of the k lookahead items) and pays
// alpha * item volume / V + beta * safe volume / V. An infeasible action pays
// nothing and ends the episode; so does running out of placeable items.

#include <array>
#include <span>
#include <vector>

#include "pack3d/sequence.hpp"
#include "pack3d/state.hpp"

namespace pack3d {

struct RewardParams {
  double alpha = 10.0;
  double beta = 0.1;
};

struct Observation {
  HeightMap hmap;
  std::vector<Dims> lookahead;  // d_n .. d_{n+k-1}
  std::array<FeasibilityMask, 2> masks;  // current item, per orientation
};

struct StepResult {
  bool accepted = false;
  double reward = 0.0;
  bool done = false;
};

struct EpisodeMetrics {
  double utilization = 0.0;
  int item_count = 0;
  double total_reward = 0.0;
  int refused = 0;  // actions refused for violating the mask
};

/// Step reward for a state reached by packing `volume` cells of item.
double step_reward(const RewardParams& params, const BinConfig& bin, long long volume,
                   long long safe);

class Episode {
 public:
  /// Validates the sequence against the bin (every item must fit in some
  /// orientation and have positive mass); throws InvalidSequence.
  Episode(const BinConfig& bin, ItemSequence sequence, int k, StabilityMode mode,
          RewardParams params = {}, bool allow_reorder = false);

  [[nodiscard]] const BinConfig& bin() const { return state_.bin(); }
  [[nodiscard]] const PackingState& state() const { return state_; }
  [[nodiscard]] const ItemSequence& sequence() const { return sequence_; }
  [[nodiscard]] StabilityMode mode() const { return mode_; }
  [[nodiscard]] const RewardParams& params() const { return params_; }
  [[nodiscard]] int k() const { return k_; }
  [[nodiscard]] bool allow_reorder() const { return allow_reorder_; }
  [[nodiscard]] bool done() const { return done_; }
  /// Number of items consumed so far.
  [[nodiscard]] int cursor() const { return cursor_; }

  /// Up to k not-yet-placed items in arrival order; the first is item n.
  [[nodiscard]] std::vector<Item> lookahead() const;
  /// Cached masks of the current item.
  [[nodiscard]] const FeasibilityMask& mask(Orientation o) const {
    return masks_[static_cast<std::size_t>(to_int(o))];
  }
  [[nodiscard]] Observation observe() const;

  /// Normalized safe volume of the current height map.
  [[nodiscard]] double v_safe() const;
  [[nodiscard]] EpisodeMetrics metrics() const;

  /// Places the current item. Throws EpisodeDone.
  StepResult step(const Action& a);
  /// Places the lookahead item at `offset` (0 = current). Requires
  /// allow_reorder for offsets above zero.
  StepResult step_item(int offset, const Action& a);

 private:
  void refresh();

  PackingState state_;
  ItemSequence sequence_;
  std::vector<int> remaining_;  // indices into sequence_.items
  int k_ = 1;
  StabilityMode mode_ = StabilityMode::kFullTree;
  RewardParams params_;
  bool allow_reorder_ = false;
  bool done_ = false;
  int cursor_ = 0;
  double total_reward_ = 0.0;
  int refused_ = 0;
  std::array<FeasibilityMask, 2> masks_;
};

/// Free-volume surrogate for the value of a state:
/// alpha * (V - occupied under the height map) / V + beta * v_safe.
double evaluate_state(const PackingState& state, const RewardParams& params = {});

}  // namespace pack3d
