#include "pack3d/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pack3d/lp_feasibility.hpp"

namespace pack3d {

namespace {

struct Contact {
  int upper = 0;
  int lower = kFloor;
  Rect rect;
};

// A box on the floor stands on its whole footprint, so any downward load
// inside that footprint is balanced by the floor: such boxes act as ground
// and get no equations of their own.
std::vector<Contact> find_contacts(std::span<const Box> boxes) {
  std::vector<Contact> out;
  const auto n = static_cast<int>(boxes.size());
  for (int u = 0; u < n; ++u) {
    const Box& a = boxes[static_cast<std::size_t>(u)];
    if (a.z == 0) continue;
    for (int l = 0; l < n; ++l) {
      const Box& b = boxes[static_cast<std::size_t>(l)];
      if (l == u || b.top != a.z) continue;
      const Rect r = a.footprint.intersect(b.footprint);
      if (!r.empty()) out.push_back(Contact{u, b.z == 0 ? kFloor : l, r});
    }
  }
  return out;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

// Builds and solves the force system for the boxes in `members`.
bool solve_component(std::span<const Box> boxes, std::span<const Contact> contacts,
                     const std::vector<int>& members, EquilibriumStats* stats) {
  std::vector<int> row_of(boxes.size(), -1);
  for (std::size_t k = 0; k < members.size(); ++k) {
    row_of[static_cast<std::size_t>(members[k])] = static_cast<int>(k);
  }
  std::vector<const Contact*> used;
  std::vector<char> has_support(members.size(), 0);
  for (const Contact& c : contacts) {
    if (row_of[static_cast<std::size_t>(c.upper)] < 0) continue;
    used.push_back(&c);
    has_support[static_cast<std::size_t>(row_of[static_cast<std::size_t>(c.upper)])] = 1;
  }
  for (char s : has_support) {
    if (!s) return false;
  }

  double mean_mass = 0.0;
  for (int i : members) mean_mass += boxes[static_cast<std::size_t>(i)].mass;
  mean_mass /= static_cast<double>(members.size());

  LinearSystem sys;
  sys.rows = 3 * static_cast<int>(members.size());
  sys.cols = 4 * static_cast<int>(used.size());
  sys.a.assign(static_cast<std::size_t>(sys.rows) * static_cast<std::size_t>(sys.cols), 0.0);
  sys.b.assign(static_cast<std::size_t>(sys.rows), 0.0);

  auto centroid = [&](int i) { return footprint_centroid(boxes[static_cast<std::size_t>(i)].footprint); };
  auto arm_scale = [&](int i) {
    const Rect& f = boxes[static_cast<std::size_t>(i)].footprint;
    return 0.5 * std::hypot(f.dx(), f.dy());
  };

  for (std::size_t k = 0; k < members.size(); ++k) {
    sys.b[3 * k] = boxes[static_cast<std::size_t>(members[k])].mass / mean_mass;
  }
  for (std::size_t j = 0; j < used.size(); ++j) {
    const Contact& c = *used[j];
    const Point2 corners[4] = {{double(c.rect.x0), double(c.rect.y0)},
                               {double(c.rect.x1), double(c.rect.y0)},
                               {double(c.rect.x0), double(c.rect.y1)},
                               {double(c.rect.x1), double(c.rect.y1)}};
    for (int q = 0; q < 4; ++q) {
      const int col = 4 * static_cast<int>(j) + q;
      // Pushes up on the upper box, down on the lower one.
      for (int side = 0; side < 2; ++side) {
        const int box = side == 0 ? c.upper : c.lower;
        if (box == kFloor) continue;
        const int k = row_of[static_cast<std::size_t>(box)];
        if (k < 0) continue;
        const double sign = side == 0 ? 1.0 : -1.0;
        const Point2 arm = corners[q] - centroid(box);
        const double s = arm_scale(box);
        sys.at(3 * k, col) += sign;
        sys.at(3 * k + 1, col) += sign * arm.x / s;
        sys.at(3 * k + 2, col) += sign * arm.y / s;
      }
    }
  }

  const LpFeasibility r = solve_feasibility(sys);
  if (stats) {
    ++stats->components;
    stats->largest_rows = std::max(stats->largest_rows, sys.rows);
    stats->largest_cols = std::max(stats->largest_cols, sys.cols);
    stats->iterations += r.iterations;
  }
  return r.feasible;
}

bool solve(std::span<const Box> boxes, const std::size_t* focus, EquilibriumStats* stats) {
  if (boxes.empty()) return true;
  const std::vector<Contact> contacts = find_contacts(boxes);
  std::vector<int> parent(boxes.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const Contact& c : contacts) {
    if (c.lower == kFloor) continue;
    const int a = find_root(parent, c.upper);
    const int b = find_root(parent, c.lower);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<std::vector<int>> groups(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    groups[static_cast<std::size_t>(find_root(parent, static_cast<int>(i)))].push_back(
        static_cast<int>(i));
  }
  if (focus) {
    if (boxes[*focus].z == 0) return true;
    const auto root = static_cast<std::size_t>(find_root(parent, static_cast<int>(*focus)));
    return solve_component(boxes, contacts, groups[root], stats);
  }
  for (const auto& g : groups) {
    if (g.size() == 1 && boxes[static_cast<std::size_t>(g[0])].z == 0) continue;
    if (!g.empty() && !solve_component(boxes, contacts, g, stats)) return false;
  }
  return true;
}

}  // namespace

std::vector<Box> boxes_of(const StackingTree& tree) {
  std::vector<Box> out;
  out.reserve(tree.size());
  for (const StackNode& n : tree.nodes()) {
    out.push_back(Box{n.footprint, n.z, n.top, n.own_mass});
  }
  return out;
}

bool equilibrium_feasible(std::span<const Box> boxes, EquilibriumStats* stats) {
  return solve(boxes, nullptr, stats);
}

bool equilibrium_feasible_at(std::span<const Box> boxes, std::size_t focus,
                             EquilibriumStats* stats) {
  if (focus >= boxes.size()) throw OutOfBounds("focus box index out of range");
  return solve(boxes, &focus, stats);
}

bool equilibrium_oracle(const StackingTree& tree, const HeightMap& hmap, const Placement& p,
                        EquilibriumStats* stats) {
  const Rect fp = p.footprint();
  const int z = hmap.support_height(fp);
  std::vector<Box> boxes = boxes_of(tree);
  boxes.push_back(Box{fp, z, z + p.item.dims.h, p.item.mass});
  return equilibrium_feasible_at(boxes, boxes.size() - 1, stats);
}

}  // namespace pack3d
