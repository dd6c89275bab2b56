#include "pack3d/state.hpp"

#include <algorithm>
#include <deque>

namespace pack3d {

int FeasibilityMask::count() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

bool FeasibilityMask::any() const {
  return std::find(bits.begin(), bits.end(), std::uint8_t{1}) != bits.end();
}

PackingState::PackingState(const BinConfig& bin)
    : bin_(bin), hmap_(bin.length, bin.width), safe_(hmap_, bin.height) {
  bin.validate();
}

std::optional<Placement> PackingState::locate(const Item& item, const Action& a) const {
  Placement p{item, a.o, a.x, a.y, 0};
  const Rect fp = p.footprint();
  if (!hmap_.contains(fp)) return std::nullopt;
  p.z = hmap_.support_height(fp);
  if (p.z + item.dims.h > bin_.height) return std::nullopt;
  return p;
}

StackingTree::CheckResult PackingState::check(const Placement& p, StabilityMode mode) const {
  tree_.find_supports(p.footprint(), p.z, regions_);
  return tree_.check(p, regions_, mode, scratch_);
}

bool PackingState::feasible(const Item& item, const Action& a, StabilityMode mode) const {
  const auto p = locate(item, a);
  return p && check(*p, mode).verdict == Verdict::kStable;
}

std::vector<int> PackingState::support_heights(int l, int w) const {
  const int L = bin_.length;
  const int W = bin_.width;
  std::vector<int> out(static_cast<std::size_t>(L) * static_cast<std::size_t>(W), -1);
  if (l > L || w > W) return out;
  // Window maximum along Y for each x, then along X.
  const int ny = W - w + 1;
  std::vector<int> along_y(static_cast<std::size_t>(L) * static_cast<std::size_t>(ny));
  std::deque<int> dq;
  for (int x = 0; x < L; ++x) {
    dq.clear();
    for (int y = 0; y < W; ++y) {
      while (!dq.empty() && hmap_.at(x, dq.back()) <= hmap_.at(x, y)) dq.pop_back();
      dq.push_back(y);
      if (dq.front() <= y - w) dq.pop_front();
      if (y >= w - 1) {
        along_y[static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) +
                static_cast<std::size_t>(y - w + 1)] = hmap_.at(x, dq.front());
      }
    }
  }
  auto ay = [&](int x, int y) {
    return along_y[static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) +
                   static_cast<std::size_t>(y)];
  };
  for (int y = 0; y < ny; ++y) {
    dq.clear();
    for (int x = 0; x < L; ++x) {
      while (!dq.empty() && ay(dq.back(), y) <= ay(x, y)) dq.pop_back();
      dq.push_back(x);
      if (dq.front() <= x - l) dq.pop_front();
      if (x >= l - 1) {
        out[static_cast<std::size_t>(x - l + 1) * static_cast<std::size_t>(W) +
            static_cast<std::size_t>(y)] = ay(dq.front(), y);
      }
    }
  }
  return out;
}

FeasibilityMask PackingState::height_mask(const Item& item, Orientation o) const {
  const Dims d = oriented(item.dims, o);
  FeasibilityMask m{bin_.length, bin_.width, o,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(bin_.area()), 0)};
  const std::vector<int> z = support_heights(d.l, d.w);
  for (std::size_t i = 0; i < z.size(); ++i) {
    m.bits[i] = z[i] >= 0 && z[i] + d.h <= bin_.height ? 1 : 0;
  }
  return m;
}

FeasibilityMask PackingState::mask(const Item& item, Orientation o, StabilityMode mode) const {
  const Dims d = oriented(item.dims, o);
  FeasibilityMask m{bin_.length, bin_.width, o,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(bin_.area()), 0)};
  const std::vector<int> z = support_heights(d.l, d.w);
  for (int x = 0; x + d.l <= bin_.length; ++x) {
    for (int y = 0; y + d.w <= bin_.width; ++y) {
      const std::size_t i =
          static_cast<std::size_t>(x) * static_cast<std::size_t>(bin_.width) +
          static_cast<std::size_t>(y);
      if (z[i] + d.h > bin_.height) continue;
      const Placement p{item, o, x, y, z[i]};
      m.bits[i] = check(p, mode).verdict == Verdict::kStable ? 1 : 0;
    }
  }
  return m;
}

void PackingState::commit(const Placement& p) {
  const Rect fp = p.footprint();
  hmap_.fill(fp, p.top());
  safe_.update(hmap_, fp);
  placements_.push_back(p);
  packed_volume_ += p.item.dims.volume();
}

StackingTree::CheckResult PackingState::place(const Item& item, const Action& a,
                                              StabilityMode mode, double mass_scale) {
  auto p = locate(item, a);
  if (!p) return {Verdict::kUnstable, 0};
  p->item.mass *= mass_scale;
  tree_.find_supports(p->footprint(), p->z, regions_);
  const auto result = tree_.place(*p, regions_, mode, scratch_);
  if (result.verdict == Verdict::kStable) commit(*p);
  return result;
}

void PackingState::force_place(const Item& item, const Action& a, StabilityMode mode) {
  Placement p{item, a.o, a.x, a.y, 0};
  const Rect fp = p.footprint();
  p.z = hmap_.support_height(fp);
  if (p.z + item.dims.h > bin_.height) throw HeightOverflow("placement exceeds bin height");
  tree_.find_supports(fp, p.z, regions_);
  if (tree_.place(p, regions_, mode, scratch_).verdict == Verdict::kUnstable) {
    tree_.append_unchecked(p, regions_);
  }
  commit(p);
}

}  // namespace pack3d
