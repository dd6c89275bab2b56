#pragma once

// Static-equilibrium check for a pile of boxes.
//
// Every contact (box on box, or box on floor) may transmit non-negative
// vertical forces at the four corners of its overlap rectangle. A pile is in
// equilibrium iff some choice of those forces balances the weight of every
// box and the two planar torques about its centroid. That is a linear
// feasibility problem; independent piles are solved separately.

#include <span>
#include <vector>

#include "pack3d/grid.hpp"
#include "pack3d/stability.hpp"

namespace pack3d {

struct Box {
  Rect footprint;
  int z = 0;
  int top = 0;
  double mass = 1.0;
};

struct EquilibriumStats {
  int components = 0;
  int largest_rows = 0;
  int largest_cols = 0;
  int iterations = 0;
};

/// Boxes of every node in the tree, in placement order.
std::vector<Box> boxes_of(const StackingTree& tree);

/// True iff the whole pile admits a non-negative equilibrium force set.
/// A box that has no contact below it (floating) makes the pile infeasible.
/// Throws SolverFailure if the LP solver breaks down.
bool equilibrium_feasible(std::span<const Box> boxes, EquilibriumStats* stats = nullptr);

/// Same check restricted to the connected pile containing `focus`.
bool equilibrium_feasible_at(std::span<const Box> boxes, std::size_t focus,
                             EquilibriumStats* stats = nullptr);

/// Oracle verdict for dropping `p` onto the pile described by `tree` and
/// `hmap`: the support height is taken from the height map and the pile that
/// the new box joins must be in equilibrium. Throws OutOfBounds.
bool equilibrium_oracle(const StackingTree& tree, const HeightMap& hmap, const Placement& p,
                        EquilibriumStats* stats = nullptr);

}  // namespace pack3d
