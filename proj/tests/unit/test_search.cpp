#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "pack3d/search.hpp"

using namespace pack3d;

namespace {

ItemSequence custom(const BinConfig& bin, std::vector<Dims> dims) {
  ItemSequence s;
  s.bin = bin;
  int id = 0;
  for (const Dims& d : dims) s.items.push_back(Item::with_unit_density(id++, d));
  return s;
}

// Independent reading of the permutation search: every order of the window,
// each item to its best cell by step reward + evaluator with ties broken by
// (o, y, x), successors at a millionth of their mass, and item 0 kept clear
// of anything placed before it.
struct Plan {
  double value = 0.0;
  bool legal = true;
  std::optional<Action> first;
};

Plan play_order(const SearchProblem& pb, const std::vector<int>& order) {
  PackingState s = pb.state;
  Plan plan;
  std::vector<Rect> before;
  double reward = 0.0;
  for (int j : order) {
    const Item& it = pb.items[static_cast<std::size_t>(j)];
    const double scale = j == 0 ? 1.0 : kVirtualMassScale;
    double best = -1e300;
    std::optional<Action> arg;
    for (Orientation o : kOrientations) {
      if (o == Orientation::kSwapped && it.dims.l == it.dims.w) continue;
      for (int y = 0; y < s.bin().width; ++y) {
        for (int x = 0; x < s.bin().length; ++x) {
          const Action a{x, y, o};
          const auto p = s.locate(it, a);
          if (!p) continue;
          if (j == 0 && std::any_of(before.begin(), before.end(),
                                    [&](const Rect& r) { return r.overlaps(p->footprint()); })) {
            continue;
          }
          PackingState c = s;
          if (c.place(it, a, pb.mode, scale).verdict != Verdict::kStable) continue;
          const double v = step_reward(pb.params, c.bin(), it.dims.volume(), c.safe_index().total()) +
                           evaluate_state(c, pb.params);
          if (v > best + 1e-12) {
            best = v;
            arg = a;
          }
        }
      }
    }
    if (!arg) {
      plan.legal = false;
      break;
    }
    const Placement p = *s.locate(it, *arg);
    s.place(it, *arg, pb.mode, scale);
    reward += step_reward(pb.params, s.bin(), it.dims.volume(), s.safe_index().total());
    if (j == 0) {
      plan.first = *arg;
    } else if (!plan.first) {
      before.push_back(p.footprint());
    }
  }
  plan.value = plan.legal ? reward + evaluate_state(s, pb.params) : reward;
  return plan;
}

Action hand_enumeration(const SearchProblem& pb) {
  std::vector<int> order(pb.items.size());
  std::iota(order.begin(), order.end(), 0);
  double best = -1e300;
  std::optional<Action> arg;
  do {
    const Plan p = play_order(pb, order);
    if (!p.first) continue;
    if (p.value > best + 1e-12 ||
        (std::abs(p.value - best) <= 1e-12 && action_less(*p.first, *arg))) {
      best = p.value;
      arg = p.first;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return *arg;
}

SearchProblem toy_problem(std::uint64_t seed, int k, int pile) {
  const BinConfig bin{5, 5, 5, 1.0};
  const ItemRegistry reg = ItemRegistry::product({1, 2}, {1, 2}, {1, 2});
  PackingState s = pack3d::testing::random_pile(bin, reg, pile, seed);
  Rng rng(seed ^ 0xABCDEF);
  SearchProblem pb;
  pb.state = s;
  for (int i = 0; i < k; ++i) {
    pb.items.push_back(Item::with_unit_density(100 + i, reg.types[uniform_below(rng, reg.types.size())]));
  }
  return pb;
}

}  // namespace

TEST(Sampler, NormalTwoItems) {
  const auto p = sampler_probabilities(SamplerKind::kNormal, 2);
  const double e = std::exp(-0.5);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(p[1], e / (1.0 + e), 1e-15);
  EXPECT_NEAR(p[0], 0.6225, 5e-5);
  EXPECT_NEAR(p[1], 0.3775, 5e-5);
}

TEST(Sampler, Weights) {
  EXPECT_DOUBLE_EQ(sampler_weight(SamplerKind::kRandom, 3), 1.0);
  EXPECT_DOUBLE_EQ(sampler_weight(SamplerKind::kInvX, 3), 0.25);
  EXPECT_DOUBLE_EQ(sampler_weight(SamplerKind::kGeom5x, 2), 25.0);
  EXPECT_DOUBLE_EQ(sampler_weight(SamplerKind::kGeomFifth, 2), 0.04);
  for (double p : sampler_probabilities(SamplerKind::kRandom, 4)) EXPECT_DOUBLE_EQ(p, 0.25);
  const auto fixed = sampler_probabilities(SamplerKind::kFixed, 3);
  EXPECT_EQ(fixed, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(Sampler, FrequenciesFollowProbabilities) {
  Rng rng(12);
  for (SamplerKind k : {SamplerKind::kNormal, SamplerKind::kRandom, SamplerKind::kInvX,
                        SamplerKind::kGeom5x, SamplerKind::kGeomFifth, SamplerKind::kFixed}) {
    const auto p = sampler_probabilities(k, 4);
    std::vector<int> hits(4, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(sample_next_item(k, 4, rng))];
    for (std::size_t i = 0; i < 4; ++i) {
      // Five standard errors.
      const double se = std::sqrt(p[i] * (1 - p[i]) / n);
      EXPECT_NEAR(hits[i] / static_cast<double>(n), p[i], 5 * se + 1e-12) << to_string(k);
    }
  }
}

TEST(Sampler, NamesRoundTrip) {
  for (const char* n : {"normal", "random", "invx", "geom5", "geomfifth", "fixed"}) {
    EXPECT_STREQ(to_string(sampler_from_string(n)), n);
  }
  EXPECT_THROW(sampler_from_string("bogus"), Error);
}

TEST(Search, SingleItemIsGreedy) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SearchProblem pb = toy_problem(seed, 1, 8);
    const auto greedy = best_placement(pb.state, pb.items[0], PlacementQuery{});
    ASSERT_TRUE(greedy);
    EXPECT_EQ(brute_force_permutation(pb).action, greedy->placement.action());
    EXPECT_EQ(mcts_search(pb, SearchBudget{20, 1, seed}, SamplerKind::kNormal).action,
              greedy->placement.action());
  }
}

TEST(Search, BruteForceMatchesHandEnumeration) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    for (int k : {2, 3}) {
      const SearchProblem pb = toy_problem(seed, k, 6);
      EXPECT_EQ(brute_force_permutation(pb).action, hand_enumeration(pb)) << seed << " k=" << k;
    }
  }
}

TEST(Search, EvaluateOrderMatchesHandPlay) {
  const SearchProblem pb = toy_problem(4, 3, 6);
  std::vector<int> order{2, 0, 1};
  const PathOutcome out = evaluate_order(pb, order);
  const Plan plan = play_order(pb, order);
  EXPECT_EQ(out.legal, plan.legal);
  EXPECT_NEAR(out.value, plan.value, 1e-9);
  EXPECT_EQ(out.n_action, plan.first);
}

TEST(Search, MctsWithLargeBudgetMatchesBruteForce) {
  int agree = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SearchProblem pb = toy_problem(seed, 3, 6);
    ++total;
    agree += mcts_search(pb, SearchBudget{60, 1, seed}, SamplerKind::kRandom).action ==
             brute_force_permutation(pb).action;
  }
  EXPECT_EQ(agree, total);
}

TEST(Search, RootClonesConserveVisits) {
  const SearchProblem pb = toy_problem(2, 3, 5);
  for (int clones : {1, 4}) {
    const SearchResult r = mcts_search(pb, SearchBudget{40, clones, 9}, SamplerKind::kNormal);
    int visits = 0;
    for (const ActionStats& s : r.stats) visits += s.visits;
    EXPECT_EQ(visits, r.simulations);
    EXPECT_GE(r.simulations, 40);
    EXPECT_TRUE(std::is_sorted(r.stats.begin(), r.stats.end(),
                               [](const ActionStats& a, const ActionStats& b) {
                                 return action_less(a.action, b.action);
                               }));
  }
}

TEST(Search, Deterministic) {
  const SearchProblem pb = toy_problem(6, 4, 5);
  const SearchResult a = mcts_search(pb, SearchBudget{80, 3, 17}, SamplerKind::kNormal);
  const SearchResult b = mcts_search(pb, SearchBudget{80, 3, 17}, SamplerKind::kNormal);
  EXPECT_EQ(a.action, b.action);
  EXPECT_EQ(a.score, b.score);
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t i = 0; i < a.stats.size(); ++i) {
    EXPECT_EQ(a.stats[i].visits, b.stats[i].visits);
    EXPECT_EQ(a.stats[i].value_sum, b.stats[i].value_sum);
  }
}

TEST(Search, DoesNotTouchTheEpisode) {
  const BinConfig bin{10, 10, 10, 1.0};
  const ItemSequence seq = generate_rs(ItemRegistry::default_for(bin), bin, 3);
  Episode ep(bin, seq, 3, StabilityMode::kFullTree);
  const HeightMap before = ep.state().hmap();
  const std::size_t nodes = ep.state().tree().size();
  MctsPolicy policy(SearchBudget{50, 2, 1}, SamplerKind::kNormal);
  const PolicyDecision d = policy.decide(ep);
  EXPECT_EQ(ep.state().hmap(), before);
  EXPECT_EQ(ep.state().tree().size(), nodes);
  EXPECT_EQ(d.item_offset, 0);
  EXPECT_TRUE(ep.mask(d.action.o).at(d.action.x, d.action.y));
}

TEST(Search, VirtualMassLeavesTheCurrentMaskUnchanged) {
  // Virtual items placed before n: n's mask over cells clear of them (in
  // plan) must equal its mask with nothing else placed.
  const BinConfig bin{10, 10, 10, 1.0};
  const ItemRegistry reg = ItemRegistry::default_for(bin);
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const PackingState base = pack3d::testing::random_pile(bin, reg, 12, seed);
    Rng rng(seed * 7);
    PackingState virt = base;
    std::vector<Rect> footprints;
    for (int v = 0; v < 3; ++v) {
      const Item it = Item::with_unit_density(50 + v, reg.types[uniform_below(rng, reg.types.size())]);
      const auto best = best_placement(virt, it, PlacementQuery{StabilityMode::kFullTree, {}, kVirtualMassScale});
      if (!best) continue;
      virt.place(it, best->placement.action(), StabilityMode::kFullTree, kVirtualMassScale);
      footprints.push_back(best->placement.footprint());
    }
    const Item n = Item::with_unit_density(99, reg.types[uniform_below(rng, reg.types.size())]);
    for (Orientation o : kOrientations) {
      const Dims d = oriented(n.dims, o);
      const FeasibilityMask a = base.mask(n, o, StabilityMode::kFullTree);
      const FeasibilityMask b = virt.mask(n, o, StabilityMode::kFullTree);
      for (int x = 0; x + d.l <= bin.length; ++x) {
        for (int y = 0; y + d.w <= bin.width; ++y) {
          const Rect fp{x, y, x + d.l, y + d.w};
          if (std::any_of(footprints.begin(), footprints.end(),
                          [&](const Rect& r) { return r.overlaps(fp); })) {
            continue;
          }
          ++compared;
          ASSERT_EQ(a.at(x, y), b.at(x, y)) << "seed " << seed << " at " << x << "," << y;
        }
      }
    }
  }
  EXPECT_GT(compared, 1000);
}
