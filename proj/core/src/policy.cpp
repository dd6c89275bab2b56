#include "pack3d/policy.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "pack3d/search.hpp"

namespace pack3d {

std::vector<Orientation> distinct_orientations(const Dims& d) {
  if (d.l == d.w) return {Orientation::kAsIs};
  return {Orientation::kAsIs, Orientation::kSwapped};
}

namespace {

std::vector<long long> height_prefix(const HeightMap& hmap) {
  const int L = hmap.length();
  const int W = hmap.width();
  std::vector<long long> p(static_cast<std::size_t>(L + 1) * static_cast<std::size_t>(W + 1), 0);
  auto at = [W](int x, int y) {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(W + 1) +
           static_cast<std::size_t>(y);
  };
  for (int x = 0; x < L; ++x) {
    for (int y = 0; y < W; ++y) {
      p[at(x + 1, y + 1)] = hmap.at(x, y) + p[at(x, y + 1)] + p[at(x + 1, y)] - p[at(x, y)];
    }
  }
  return p;
}

template <typename T>
T rect_sum(const std::vector<T>& p, int width, const Rect& r) {
  auto at = [width](int x, int y) {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(width + 1) +
           static_cast<std::size_t>(y);
  };
  return p[at(r.x1, r.y1)] - p[at(r.x0, r.y1)] - p[at(r.x1, r.y0)] + p[at(r.x0, r.y0)];
}

bool overlaps_any(const Rect& fp, std::span<const Rect> avoid) {
  return std::any_of(avoid.begin(), avoid.end(), [&](const Rect& r) { return r.overlaps(fp); });
}

struct Candidate {
  double score;
  Action action;
  int z;
};

}  // namespace

std::optional<ScoredPlacement> best_placement(const PackingState& state, const Item& item,
                                              const PlacementQuery& q) {
  const BinConfig& bin = state.bin();
  const HeightMap& hmap = state.hmap();
  const auto V = static_cast<double>(bin.volume());
  const std::vector<long long> prefix = height_prefix(hmap);
  const long long occupied = hmap.total();
  const double gain = q.params.alpha * static_cast<double>(item.dims.volume()) / V;

  std::vector<Candidate> cands;
  for (Orientation o : distinct_orientations(item.dims)) {
    const Dims d = oriented(item.dims, o);
    if (d.l > bin.length || d.w > bin.width) continue;
    const std::vector<int> z = state.support_heights(d.l, d.w);
    const FeasibilityMask* mask =
        q.masks ? &(*q.masks)[static_cast<std::size_t>(to_int(o))] : nullptr;
    for (int x = 0; x + d.l <= bin.length; ++x) {
      for (int y = 0; y + d.w <= bin.width; ++y) {
        const int zi = z[static_cast<std::size_t>(x) * static_cast<std::size_t>(bin.width) +
                         static_cast<std::size_t>(y)];
        const int top = zi + d.h;
        if (top > bin.height) continue;
        if (mask && !mask->at(x, y)) continue;
        const Rect fp{x, y, x + d.l, y + d.w};
        if (!q.avoid.empty() && overlaps_any(fp, q.avoid)) continue;
        const long long after = occupied + fp.area() * top - rect_sum(prefix, bin.width, fp);
        const long long safe = state.safe_index().after_fill(hmap, fp, top);
        const double score = gain + 2.0 * q.params.beta * static_cast<double>(safe) / V +
                             q.params.alpha * (V - static_cast<double>(after)) / V;
        cands.push_back(Candidate{score, Action{x, y, o}, zi});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return action_less(a.action, b.action);
  });
  Item placed = item;
  placed.mass *= q.mass_scale;
  for (const Candidate& c : cands) {
    const Placement p{placed, c.action.o, c.action.x, c.action.y, c.z};
    if (q.masks || state.check(p, q.mode).verdict == Verdict::kStable) {
      return ScoredPlacement{p, c.score};
    }
  }
  return std::nullopt;
}

PolicyDecision RandomPolicy::decide(const Episode& episode) {
  if (episode.done()) throw NoFeasible();
  const Item item = episode.lookahead().front();
  std::vector<Action> valid;
  for (Orientation o : distinct_orientations(item.dims)) {
    const FeasibilityMask& m = episode.mask(o);
    for (int x = 0; x < m.length; ++x) {
      for (int y = 0; y < m.width; ++y) {
        if (m.at(x, y)) valid.push_back(Action{x, y, o});
      }
    }
  }
  if (valid.empty()) throw NoFeasible();
  return PolicyDecision{valid[uniform_below(rng_, valid.size())], 0, 0.0};
}

PolicyDecision GreedyPolicy::decide(const Episode& episode) {
  if (episode.done()) throw NoFeasible();
  const Item item = episode.lookahead().front();
  const std::array<FeasibilityMask, 2> masks{episode.mask(Orientation::kAsIs),
                                             episode.mask(Orientation::kSwapped)};
  PlacementQuery q;
  q.mode = episode.mode();
  q.params = episode.params();
  q.masks = &masks;
  const auto best = best_placement(episode.state(), item, q);
  if (!best) throw NoFeasible();
  return PolicyDecision{best->placement.action(), 0, best->score};
}

std::vector<int> occupancy_prefix(const HeightMap& hmap) {
  const int L = hmap.length();
  const int W = hmap.width();
  std::vector<int> p(static_cast<std::size_t>(L + 1) * static_cast<std::size_t>(W + 1), 0);
  auto at = [W](int x, int y) {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(W + 1) +
           static_cast<std::size_t>(y);
  };
  for (int x = 0; x < L; ++x) {
    for (int y = 0; y < W; ++y) {
      p[at(x + 1, y + 1)] =
          (hmap.at(x, y) > 0 ? 1 : 0) + p[at(x, y + 1)] + p[at(x + 1, y)] - p[at(x, y)];
    }
  }
  return p;
}

int boundary_gap(const std::vector<int>& occupied, int length, int width, const Rect& fp) {
  const int wall = std::min({fp.x0, fp.y0, length - fp.x1, width - fp.y1});
  const int inside = rect_sum(occupied, width, fp);
  auto touches = [&](int d) {
    const Rect r{std::max(0, fp.x0 - d), std::max(0, fp.y0 - d), std::min(length, fp.x1 + d),
                 std::min(width, fp.y1 + d)};
    return rect_sum(occupied, width, r) > inside;
  };
  // Smallest d with an occupied cell within d + 1 of the footprint.
  if (wall == 0 || touches(1)) return 0;
  if (!touches(wall)) return wall;
  int lo = 0;
  int hi = wall - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (touches(mid + 1)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

PolicyDecision BoundaryPolicy::decide(const Episode& episode) {
  if (episode.done()) throw NoFeasible();
  const Item item = episode.lookahead().front();
  const PackingState& s = episode.state();
  const std::vector<int> occ = occupancy_prefix(s.hmap());
  using Key = std::tuple<int, int, int, int, int>;  // z, gap, -y, x, o
  std::optional<Key> best;
  Action chosen;
  for (Orientation o : distinct_orientations(item.dims)) {
    const Dims d = oriented(item.dims, o);
    const FeasibilityMask& m = episode.mask(o);
    const std::vector<int> z = s.support_heights(d.l, d.w);
    for (int x = 0; x + d.l <= m.length; ++x) {
      for (int y = 0; y + d.w <= m.width; ++y) {
        if (!m.at(x, y)) continue;
        const Rect fp{x, y, x + d.l, y + d.w};
        const Key key{z[static_cast<std::size_t>(x) * static_cast<std::size_t>(m.width) +
                        static_cast<std::size_t>(y)],
                      boundary_gap(occ, m.length, m.width, fp), -y, x, to_int(o)};
        if (!best || key < *best) {
          best = key;
          chosen = Action{x, y, o};
        }
      }
    }
  }
  if (!best) throw NoFeasible();
  return PolicyDecision{chosen, 0, -static_cast<double>(std::get<0>(*best))};
}

long long surface_irregularity(const HeightMap& hmap, const Rect& fp, int top) {
  long long s = 0;
  auto add = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < hmap.length() && y < hmap.width()) {
      s += std::abs(top - hmap.at(x, y));
    }
  };
  for (int y = fp.y0; y < fp.y1; ++y) {
    add(fp.x0 - 1, y);
    add(fp.x1, y);
  }
  for (int x = fp.x0; x < fp.x1; ++x) {
    add(x, fp.y0 - 1);
    add(x, fp.y1);
  }
  return s;
}

PolicyDecision BphPolicy::decide(const Episode& episode) {
  if (episode.done()) throw NoFeasible();
  const std::vector<Item> window = episode.lookahead();
  const PackingState& s = episode.state();
  const std::size_t items = reorder_ && episode.allow_reorder() ? window.size() : 1;
  // top, irregularity, y, x, o, offset
  using Key = std::tuple<int, long long, int, int, int, int>;
  std::optional<Key> best;
  for (std::size_t j = 0; j < items; ++j) {
    const Item& item = window[j];
    for (Orientation o : distinct_orientations(item.dims)) {
      const Dims d = oriented(item.dims, o);
      const FeasibilityMask m = j == 0 ? episode.mask(o) : s.mask(item, o, episode.mode());
      if (d.l > m.length || d.w > m.width) continue;
      const std::vector<int> z = s.support_heights(d.l, d.w);
      for (int x = 0; x + d.l <= m.length; ++x) {
        for (int y = 0; y + d.w <= m.width; ++y) {
          if (!m.at(x, y)) continue;
          const int top = z[static_cast<std::size_t>(x) * static_cast<std::size_t>(m.width) +
                            static_cast<std::size_t>(y)] +
                          d.h;
          const Rect fp{x, y, x + d.l, y + d.w};
          const Key key{top, surface_irregularity(s.hmap(), fp, top), y, x, to_int(o),
                        static_cast<int>(j)};
          if (!best || key < *best) best = key;
        }
      }
    }
  }
  if (!best) throw NoFeasible();
  const auto [top, irregular, y, x, o, j] = *best;
  return PolicyDecision{Action{x, y, orientation_from_int(o)}, j, -static_cast<double>(top)};
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"random", "greedy",      "boundary",
                                              "bph",    "bph-reorder", "mcts"};
  return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const PolicyOptions& options) {
  if (name == "random") return std::make_unique<RandomPolicy>(options.seed);
  if (name == "greedy") return std::make_unique<GreedyPolicy>();
  if (name == "boundary") return std::make_unique<BoundaryPolicy>();
  if (name == "bph") return std::make_unique<BphPolicy>(false);
  if (name == "bph-reorder") return std::make_unique<BphPolicy>(true);
  if (name == "mcts") {
    return std::make_unique<MctsPolicy>(
        SearchBudget{options.mcts_m, options.mcts_clones, options.seed},
        sampler_from_string(options.sampler));
  }
  throw Error("unknown policy '" + name + "'");
}

}  // namespace pack3d
