#include "pack3d/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace pack3d {

const char* to_string(StabilityMode mode) {
  return mode == StabilityMode::kFullTree ? "full" : "current-only";
}

StabilityMode stability_mode_from_string(const std::string& text) {
  if (text == "full" || text == "full-tree") return StabilityMode::kFullTree;
  if (text == "current-only" || text == "current") return StabilityMode::kCurrentOnly;
  throw Error("unknown stability mode '" + text + "'");
}

namespace {

bool rect_contains(const Rect& r, Point2 p, double slack) {
  return p.x >= r.x0 - slack && p.x <= r.x1 + slack && p.y >= r.y0 - slack &&
         p.y <= r.y1 + slack;
}

bool supported_impl(Point2 c, std::span<const ContactRegion> regions, double slack,
                    std::vector<Point2>& corners) {
  for (const ContactRegion& r : regions) {
    if (rect_contains(r.rect, c, slack)) return true;
  }
  if (regions.size() < 2) return false;
  // Cheap rejection against the bounding box of all regions.
  Rect box = regions.front().rect;
  for (const ContactRegion& r : regions) {
    box.x0 = std::min(box.x0, r.rect.x0);
    box.y0 = std::min(box.y0, r.rect.y0);
    box.x1 = std::max(box.x1, r.rect.x1);
    box.y1 = std::max(box.y1, r.rect.y1);
  }
  if (!rect_contains(box, c, slack)) return false;
  corners.clear();
  for (const ContactRegion& r : regions) {
    corners.push_back({double(r.rect.x0), double(r.rect.y0)});
    corners.push_back({double(r.rect.x1), double(r.rect.y0)});
    corners.push_back({double(r.rect.x0), double(r.rect.y1)});
    corners.push_back({double(r.rect.x1), double(r.rect.y1)});
  }
  const std::vector<Point2> hull = convex_hull(corners);
  return hull_contains(hull, c, slack);
}

void clamp_and_renormalize(double mass, std::vector<double>& flows) {
  double positive = 0.0;
  for (double& f : flows) {
    if (f < 0.0) f = 0.0;
    positive += f;
  }
  if (positive <= 0.0) {
    std::fill(flows.begin(), flows.end(), mass / static_cast<double>(flows.size()));
    return;
  }
  const double scale = mass / positive;
  for (double& f : flows) f *= scale;
}

// Shares for distinct points, fractions of a unit mass.
void distribute_distinct(Point2 c, std::span<const Point2> pts, std::vector<double>& out) {
  const std::size_t r = pts.size();
  out.assign(r, 0.0);
  if (r == 1) {
    out[0] = 1.0;
    return;
  }
  if (r == 2) {
    // Lever law: the share of p0 is the projected distance of c from p1.
    const Point2 d = pts[0] - pts[1];
    const double t = dot(c - pts[1], d) / dot(d, d);
    out[0] = t;
    out[1] = 1.0 - t;
    return;
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      scale = std::max(scale, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
    }
  }
  // Collinear contacts: every pair axis is the same line, so balance moments
  // about axes perpendicular to it instead.
  bool collinear = true;
  for (std::size_t k = 2; k < r && collinear; ++k) {
    collinear = std::abs(cross(pts[0], pts[1], pts[k])) <= 1e-12 * scale * scale;
  }
  Point2 axis = pts[1] - pts[0];
  {
    std::size_t far = 1;
    for (std::size_t k = 1; k < r; ++k) {
      if (dot(pts[k] - pts[0], pts[k] - pts[0]) > dot(pts[far] - pts[0], pts[far] - pts[0])) {
        far = k;
      }
    }
    axis = pts[far] - pts[0];
    const double len = std::hypot(axis.x, axis.y);
    axis = {axis.x / len, axis.y / len};
  }

  // Every pairwise moment row is linear in the per-contact features
  // (x_k, y_k, 1), so A = R B with R the per-row coefficients of those
  // features. The minimum-norm least-squares solution A^+ b then factors as
  // B^T (B B^T)^-1 (R^T R)^-1 R^T b, which only needs 3x3 (or, for collinear
  // contacts, 2x2) solves.
  constexpr double kForceWeight = 10.0;
  auto local = [&](Point2 p) { return Point2{(p.x - pts[0].x) / scale, (p.y - pts[0].y) / scale}; };
  const Point2 lc = local(c);
  if (collinear) {
    // Features (t_k, 1) with t_k the position along the contact line.
    thread_local std::vector<double> t;
    t.resize(r);
    for (std::size_t k = 0; k < r; ++k) t[k] = dot(local(pts[k]), axis);
    const double tc = dot(lc, axis);
    Eigen::Matrix2d rtr = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rtb = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        // Moment about the axis through p_j perpendicular to the line.
        const Eigen::Vector2d row(1.0, -t[j]);
        rtr += row * row.transpose();
        rtb += row * (tc - t[j]);
      }
    }
    const Eigen::Vector2d force(0.0, kForceWeight);
    rtr += force * force.transpose();
    rtb += force * kForceWeight;
    const Eigen::Vector2d y = rtr.ldlt().solve(rtb);
    Eigen::Matrix2d bbt = Eigen::Matrix2d::Zero();
    for (std::size_t k = 0; k < r; ++k) {
      const Eigen::Vector2d col(t[k], 1.0);
      bbt += col * col.transpose();
    }
    const Eigen::Vector2d z = bbt.ldlt().solve(y);
    for (std::size_t k = 0; k < r; ++k) out[k] = z(0) * t[k] + z(1);
    return;
  }

  thread_local std::vector<Point2> q;
  q.resize(r);
  for (std::size_t k = 0; k < r; ++k) q[k] = local(pts[k]);
  Eigen::Matrix3d rtr = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rtb = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      // Moment about the axis through p_i and p_j: the other contacts must
      // balance the load's signed lever arm.
      const Point2 d = q[j] - q[i];
      const double len = std::hypot(d.x, d.y);
      const Point2 normal{-d.y / len, d.x / len};
      const Eigen::Vector3d row(normal.x, normal.y, -dot(q[i], normal));
      rtr += row * row.transpose();
      rtb += row * dot(lc - q[i], normal);
    }
  }
  const Eigen::Vector3d force(0.0, 0.0, kForceWeight);
  rtr += force * force.transpose();
  rtb += force * kForceWeight;
  const Eigen::Vector3d y = rtr.ldlt().solve(rtb);
  Eigen::Matrix3d bbt = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < r; ++k) {
    const Eigen::Vector3d col(q[k].x, q[k].y, 1.0);
    bbt += col * col.transpose();
  }
  const Eigen::Vector3d z = bbt.ldlt().solve(y);
  for (std::size_t k = 0; k < r; ++k) out[k] = z(0) * q[k].x + z(1) * q[k].y + z(2);
}

}  // namespace

bool is_centroid_supported(Point2 centroid, std::span<const ContactRegion> regions,
                           double slack) {
  std::vector<Point2> corners;
  return supported_impl(centroid, regions, slack, corners);
}

void distribute_mass(double mass, Point2 centroid, std::span<const Point2> contact_points,
                     std::vector<double>& flows) {
  const std::size_t r = contact_points.size();
  flows.assign(r, 0.0);
  if (r == 0) return;
  if (r == 1) {
    flows[0] = mass;
    return;
  }

  // Group coinciding points; each group is solved as one contact. Scratch
  // buffers are per thread: this runs once per mask cell.
  thread_local std::vector<int> group;
  thread_local std::vector<Point2> unique;
  thread_local std::vector<double> shares;
  thread_local std::vector<int> members;
  group.assign(r, -1);
  unique.clear();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t u = 0; u < unique.size(); ++u) {
      const Point2 d = contact_points[i] - unique[u];
      if (std::abs(d.x) <= 1e-12 && std::abs(d.y) <= 1e-12) {
        group[i] = static_cast<int>(u);
        break;
      }
    }
    if (group[i] < 0) {
      group[i] = static_cast<int>(unique.size());
      unique.push_back(contact_points[i]);
    }
  }

  distribute_distinct(centroid, unique, shares);
  for (double& s : shares) s *= mass;
  clamp_and_renormalize(mass, shares);

  members.assign(unique.size(), 0);
  for (std::size_t i = 0; i < r; ++i) ++members[static_cast<std::size_t>(group[i])];
  for (std::size_t i = 0; i < r; ++i) {
    const auto g = static_cast<std::size_t>(group[i]);
    flows[i] = shares[g] / members[g];
  }
}

std::vector<double> distribute_mass(double mass, Point2 centroid,
                                    std::span<const Point2> contact_points) {
  std::vector<double> flows;
  distribute_mass(mass, centroid, contact_points, flows);
  return flows;
}

std::vector<double> distribute_mass(double mass, Point2 centroid,
                                    std::span<const ContactRegion> regions) {
  std::vector<Point2> pts;
  pts.reserve(regions.size());
  for (const ContactRegion& r : regions) pts.push_back(r.contact_point());
  return distribute_mass(mass, centroid, pts);
}

// ---------------------------------------------------------------------------

void PropagationScratch::reset(std::size_t node_count) {
  if (stamp_.size() < node_count) {
    stamp_.resize(node_count, 0);
    slot_.resize(node_count, -1);
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  used_ = 0;
  heap_.clear();
}

PropagationScratch::Entry& PropagationScratch::entry_for(const StackingTree& tree, int node) {
  const auto n = static_cast<std::size_t>(node);
  if (stamp_[n] == epoch_) return entries_[static_cast<std::size_t>(slot_[n])];
  stamp_[n] = epoch_;
  slot_[n] = static_cast<int>(used_);
  if (used_ == entries_.size()) entries_.emplace_back();
  Entry& e = entries_[used_++];
  const StackNode& src = tree.node(n);
  e.node = node;
  e.pending_mass = 0.0;
  e.pending_moment = {};
  e.group_mass = src.group_mass;
  e.group_moment = src.group_moment;
  e.flows.resize(src.supports.size());
  e.moments.resize(src.supports.size());
  for (std::size_t i = 0; i < src.supports.size(); ++i) {
    e.flows[i] = src.supports[i].flow;
    e.moments[i] = src.supports[i].moment;
  }
  heap_.push_back(node);
  std::push_heap(heap_.begin(), heap_.end());
  return e;
}

void StackingTree::find_supports(const Rect& footprint, int z,
                                 std::vector<ContactRegion>& out) const {
  out.clear();
  if (z == 0) {
    out.push_back(ContactRegion{kFloor, footprint});
    return;
  }
  if (static_cast<std::size_t>(z) >= by_top_.size()) return;
  // Two items sharing a top height cannot overlap in plan, and any part of a
  // top face covered by a later item is higher than z, so the overlaps below
  // are disjoint and lie exactly at height z.
  for (int idx : by_top_[static_cast<std::size_t>(z)]) {
    const Rect r = nodes_[static_cast<std::size_t>(idx)].footprint.intersect(footprint);
    if (!r.empty()) out.push_back(ContactRegion{idx, r});
  }
}

std::vector<ContactRegion> StackingTree::find_supports(const Rect& footprint, int z) const {
  std::vector<ContactRegion> out;
  find_supports(footprint, z, out);
  return out;
}

StackingTree::CheckResult StackingTree::check(const Placement& p,
                                              std::span<const ContactRegion> regions,
                                              StabilityMode mode,
                                              PropagationScratch& s) const {
  CheckResult result;
  const Rect fp = p.footprint();
  const Point2 c = footprint_centroid(fp);
  s.reset(nodes_.size());
  if (regions.empty() || !supported_impl(c, regions, 1e-9, s.points_)) {
    result.verdict = Verdict::kUnstable;
    return result;
  }

  // The new item's own edges.
  s.points_.clear();
  for (const ContactRegion& r : regions) s.points_.push_back(r.contact_point());
  const double mass = p.item.mass;
  distribute_mass(mass, c, s.points_, s.new_flows_);
  s.new_moments_.resize(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Point2 at = regions.size() == 1 ? c : s.points_[i];
    s.new_moments_[i] = s.new_flows_[i] * at;
  }
  if (mode == StabilityMode::kCurrentOnly) return result;

  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].supporter == kFloor) continue;
    auto& e = s.entry_for(*this, regions[i].supporter);
    e.pending_mass += s.new_flows_[i];
    e.pending_moment = e.pending_moment + s.new_moments_[i];
  }

  // Supporters always precede what they support, so popping the largest index
  // first sees every inflow of a node before the node is processed.
  while (!s.heap_.empty()) {
    std::pop_heap(s.heap_.begin(), s.heap_.end());
    const int idx = s.heap_.back();
    s.heap_.pop_back();
    const StackNode& node = nodes_[static_cast<std::size_t>(idx)];
    // entry_for may grow entries_, so entries are always re-resolved by slot.
    const auto slot = static_cast<std::size_t>(s.slot_[static_cast<std::size_t>(idx)]);
    double group_mass = 0.0;
    Point2 gc;
    {
      auto& e = s.entries_[slot];
      e.group_mass += e.pending_mass;
      e.group_moment = e.group_moment + e.pending_moment;
      group_mass = e.group_mass;
      gc = {e.group_moment.x / e.group_mass, e.group_moment.y / e.group_mass};
    }
    ++result.touched;

    bool ok = false;
    for (const SupportEdge& edge : node.supports) {
      if (rect_contains(edge.region.rect, gc, 1e-9)) {
        ok = true;
        break;
      }
    }
    if (!ok && node.supports.size() >= 2) {
      s.points_.clear();
      for (const SupportEdge& edge : node.supports) {
        const Rect& r = edge.region.rect;
        s.points_.push_back({double(r.x0), double(r.y0)});
        s.points_.push_back({double(r.x1), double(r.y0)});
        s.points_.push_back({double(r.x0), double(r.y1)});
        s.points_.push_back({double(r.x1), double(r.y1)});
      }
      const std::vector<Point2> hull = convex_hull(s.points_);
      ok = hull_contains(hull, gc, 1e-9);
    }
    if (!ok) {
      result.verdict = Verdict::kUnstable;
      return result;
    }

    const std::size_t r = node.supports.size();
    s.points_.clear();
    for (const SupportEdge& edge : node.supports) s.points_.push_back(edge.region.contact_point());
    distribute_mass(group_mass, gc, s.points_, s.flows_);
    for (std::size_t i = 0; i < r; ++i) {
      const Point2 at = r == 1 ? gc : s.points_[i];
      const double flow = s.flows_[i];
      const Point2 moment = flow * at;
      const double dm = flow - s.entries_[slot].flows[i];
      const Point2 dmom = moment - s.entries_[slot].moments[i];
      s.entries_[slot].flows[i] = flow;
      s.entries_[slot].moments[i] = moment;
      const int below = node.supports[i].region.supporter;
      if (below != kFloor && (dm != 0.0 || dmom.x != 0.0 || dmom.y != 0.0)) {
        auto& target = s.entry_for(*this, below);
        target.pending_mass += dm;
        target.pending_moment = target.pending_moment + dmom;
      }
    }
  }
  return result;
}

StackingTree::CheckResult StackingTree::check(const Placement& p,
                                              std::span<const ContactRegion> regions,
                                              StabilityMode mode) const {
  PropagationScratch scratch;
  return check(p, regions, mode, scratch);
}

StackingTree::CheckResult StackingTree::place(const Placement& p,
                                              std::span<const ContactRegion> regions,
                                              StabilityMode mode, PropagationScratch& s) {
  const CheckResult result = check(p, regions, mode, s);
  if (result.verdict == Verdict::kUnstable) return result;

  for (std::size_t k = 0; k < s.used_; ++k) {
    const auto& e = s.entries_[k];
    StackNode& node = nodes_[static_cast<std::size_t>(e.node)];
    node.group_mass = e.group_mass;
    node.group_moment = e.group_moment;
    for (std::size_t i = 0; i < node.supports.size(); ++i) {
      node.supports[i].flow = e.flows[i];
      node.supports[i].moment = e.moments[i];
    }
  }

  append_node(p, regions, s.new_flows_, s.new_moments_);
  return result;
}

StackingTree::CheckResult StackingTree::place(const Placement& p,
                                              std::span<const ContactRegion> regions,
                                              StabilityMode mode) {
  PropagationScratch scratch;
  return place(p, regions, mode, scratch);
}

void StackingTree::append_node(const Placement& p, std::span<const ContactRegion> regions,
                               std::span<const double> flows,
                               std::span<const Point2> moments) {
  StackNode fresh;
  fresh.item_id = p.item.id;
  fresh.footprint = p.footprint();
  fresh.z = p.z;
  fresh.top = p.z + p.item.dims.h;
  fresh.own_mass = p.item.mass;
  fresh.own_centroid = footprint_centroid(fresh.footprint);
  fresh.group_mass = fresh.own_mass;
  fresh.group_moment = fresh.own_mass * fresh.own_centroid;
  fresh.supports.reserve(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    fresh.supports.push_back(SupportEdge{regions[i], flows[i], moments[i]});
  }
  const auto idx = static_cast<int>(nodes_.size());
  if (by_top_.size() <= static_cast<std::size_t>(fresh.top)) {
    by_top_.resize(static_cast<std::size_t>(fresh.top) + 1);
  }
  by_top_[static_cast<std::size_t>(fresh.top)].push_back(idx);
  nodes_.push_back(std::move(fresh));
}

void StackingTree::append_unchecked(const Placement& p, std::span<const ContactRegion> regions) {
  const Point2 c = footprint_centroid(p.footprint());
  std::vector<Point2> pts;
  for (const ContactRegion& r : regions) pts.push_back(r.contact_point());
  std::vector<double> flows;
  distribute_mass(p.item.mass, c, pts, flows);
  std::vector<Point2> moments(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    moments[i] = flows[i] * (regions.size() == 1 ? c : pts[i]);
  }
  append_node(p, regions, flows, moments);
}

RecomputeResult full_recompute(const BinConfig& bin, std::span<const Placement> placements,
                               StabilityMode mode) {
  RecomputeResult out{StackingTree{}, HeightMap(bin.length, bin.width), Verdict::kStable};
  PropagationScratch scratch;
  std::vector<ContactRegion> regions;
  for (Placement p : placements) {
    const Rect fp = p.footprint();
    p.z = out.hmap.support_height(fp);
    if (p.z + p.item.dims.h > bin.height) {
      throw HeightOverflow("replayed placement exceeds bin height");
    }
    out.tree.find_supports(fp, p.z, regions);
    if (out.tree.place(p, regions, mode, scratch).verdict == Verdict::kUnstable) {
      out.verdict = Verdict::kUnstable;
      return out;
    }
    out.hmap.fill(fp, p.z + p.item.dims.h);
  }
  return out;
}

}  // namespace pack3d
