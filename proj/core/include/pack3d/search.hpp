#pragma once

// BPP-k lookahead. The k visible items may be placed in any virtual order;
// every item except the current one n gets mass * 1e-6 so that items which
// do not exist yet cannot change n's stability verdict, and n may not rest on
// or overlap (in plan) an item virtually placed before it, so the plan stays
// realizable when n really goes first. Each item in an order goes to its
// evaluator-best feasible cell. A path scores its accumulated reward plus the
// evaluator of the end state, or only the reward if some item could not be
// placed. The committed decision is n's placement from the best path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pack3d/env.hpp"
#include "pack3d/policy.hpp"

namespace pack3d {

inline constexpr double kVirtualMassScale = 1e-6;

enum class SamplerKind : std::uint8_t { kNormal, kRandom, kInvX, kGeom5x, kGeomFifth, kFixed };

const char* to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& text);

/// Unnormalized weight of zero-based sorted arrival index x.
double sampler_weight(SamplerKind kind, int x);
/// Probabilities over `n` unselected items.
std::vector<double> sampler_probabilities(SamplerKind kind, int n);
/// Index into the arrival-sorted unselected items.
int sample_next_item(SamplerKind kind, int n, Rng& rng);

struct SearchBudget {
  int m = 600;      // simulations in total
  int clones = 1;   // independent root-parallel trees
  std::uint64_t seed = 0;
};

struct ActionStats {
  Action action;
  int visits = 0;
  double value_sum = 0.0;
  double best = 0.0;  // highest path value seen through this action of n
};

struct SearchResult {
  Action action;
  double score = 0.0;
  int simulations = 0;  // root visits summed over clones
  std::vector<ActionStats> stats;  // merged, sorted by (o, y, x)
};

/// The lookahead problem: a snapshot and the visible items, n first.
struct SearchProblem {
  PackingState state;
  std::vector<Item> items;
  StabilityMode mode = StabilityMode::kFullTree;
  RewardParams params;

  static SearchProblem from_episode(const Episode& episode);
};

/// Outcome of placing the items in one virtual order.
struct PathOutcome {
  double value = 0.0;
  bool legal = true;
  std::optional<Action> n_action;
};

/// Evaluates one virtual order (a permutation of item indices).
PathOutcome evaluate_order(const SearchProblem& problem, const std::vector<int>& order);

/// Exhaustive search over all k! virtual orders. Throws NoFeasible.
SearchResult brute_force_permutation(const SearchProblem& problem);

/// Root-parallel Monte Carlo tree search over virtual orders. Throws NoFeasible.
SearchResult mcts_search(const SearchProblem& problem, const SearchBudget& budget,
                         SamplerKind sampler, double exploration = 1.0);

class MctsPolicy final : public Policy {
 public:
  MctsPolicy(SearchBudget budget, SamplerKind sampler) : budget_(budget), sampler_(sampler) {}
  [[nodiscard]] std::string name() const override { return "mcts"; }
  PolicyDecision decide(const Episode& episode) override;

 private:
  SearchBudget budget_;
  SamplerKind sampler_;
};

}  // namespace pack3d
