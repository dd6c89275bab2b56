#include "pack3d/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

namespace pack3d {

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kNormal: return "normal";
    case SamplerKind::kRandom: return "random";
    case SamplerKind::kInvX: return "invx";
    case SamplerKind::kGeom5x: return "geom5";
    case SamplerKind::kGeomFifth: return "geomfifth";
    case SamplerKind::kFixed: return "fixed";
  }
  return "normal";
}

SamplerKind sampler_from_string(const std::string& text) {
  if (text == "normal") return SamplerKind::kNormal;
  if (text == "random") return SamplerKind::kRandom;
  if (text == "invx") return SamplerKind::kInvX;
  if (text == "geom5") return SamplerKind::kGeom5x;
  if (text == "geomfifth") return SamplerKind::kGeomFifth;
  if (text == "fixed") return SamplerKind::kFixed;
  throw Error("unknown sampler '" + text + "'");
}

double sampler_weight(SamplerKind kind, int x) {
  const double v = x;
  switch (kind) {
    case SamplerKind::kNormal: return std::exp(-v * v / 2.0);
    case SamplerKind::kRandom: return 1.0;
    case SamplerKind::kInvX: return 1.0 / (v + 1.0);
    case SamplerKind::kGeom5x: return std::pow(5.0, v);
    case SamplerKind::kGeomFifth: return std::pow(0.2, v);
    case SamplerKind::kFixed: return x == 0 ? 1.0 : 0.0;
  }
  return 1.0;
}

std::vector<double> sampler_probabilities(SamplerKind kind, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) p[static_cast<std::size_t>(x)] = sampler_weight(kind, x);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

int sample_next_item(SamplerKind kind, int n, Rng& rng) {
  if (n <= 0) throw Error("no unselected items to sample");
  if (kind == SamplerKind::kFixed || n == 1) return 0;
  double total = 0.0;
  for (int x = 0; x < n; ++x) total += sampler_weight(kind, x);
  double u = uniform_unit(rng) * total;
  for (int x = 0; x < n; ++x) {
    u -= sampler_weight(kind, x);
    if (u < 0.0) return x;
  }
  return n - 1;
}

SearchProblem SearchProblem::from_episode(const Episode& episode) {
  return SearchProblem{episode.state(), episode.lookahead(), episode.mode(), episode.params()};
}

namespace {

// Partial virtual plan: state after the items placed so far.
struct PathState {
  PackingState state;
  double reward = 0.0;
  std::vector<Rect> virtual_before_n;  // footprints n must stay clear of
  std::optional<Action> n_action;
  bool legal = true;

  PathState() = default;
  explicit PathState(const PackingState& s) : state(s) {}
};

// Places item j of the window; returns false (and marks the path illegal)
// when it has no feasible cell.
bool advance(const SearchProblem& pb, PathState& ps, int j) {
  const Item& item = pb.items[static_cast<std::size_t>(j)];
  PlacementQuery q;
  q.mode = pb.mode;
  q.params = pb.params;
  const bool real = j == 0;
  q.mass_scale = real ? 1.0 : kVirtualMassScale;
  if (real) q.avoid = ps.virtual_before_n;
  const auto best = best_placement(ps.state, item, q);
  if (!best) {
    ps.legal = false;
    return false;
  }
  const Action a = best->placement.action();
  ps.state.place(item, a, pb.mode, q.mass_scale);
  ps.reward += step_reward(pb.params, ps.state.bin(), item.dims.volume(),
                           ps.state.safe_index().total());
  if (real) {
    ps.n_action = a;
  } else if (!ps.n_action) {
    ps.virtual_before_n.push_back(best->placement.footprint());
  }
  return true;
}

double final_value(const SearchProblem& pb, const PathState& ps) {
  return ps.legal ? ps.reward + evaluate_state(ps.state, pb.params) : ps.reward;
}

struct StatsTable {
  std::map<std::tuple<int, int, int>, ActionStats> by_action;  // keyed (o, y, x)

  void add(const Action& a, double value, int visits = 1) {
    auto [it, fresh] = by_action.try_emplace({to_int(a.o), a.y, a.x});
    ActionStats& s = it->second;
    if (fresh) {
      s.action = a;
      s.best = value;
    }
    s.visits += visits;
    s.value_sum += value;
    s.best = std::max(s.best, value);
  }
  void merge(const StatsTable& other) {
    for (const auto& [key, s] : other.by_action) {
      auto [it, fresh] = by_action.try_emplace(key, s);
      if (!fresh) {
        it->second.visits += s.visits;
        it->second.value_sum += s.value_sum;
        it->second.best = std::max(it->second.best, s.best);
      }
    }
  }
};

// Highest best path value; ties go to the smallest (o, y, x).
SearchResult pick(const StatsTable& table, int simulations) {
  if (table.by_action.empty()) throw NoFeasible();
  SearchResult r;
  r.simulations = simulations;
  const ActionStats* chosen = nullptr;
  for (const auto& [key, s] : table.by_action) {
    r.stats.push_back(s);
    if (!chosen || s.best > chosen->best) chosen = &s;
  }
  r.action = chosen->action;
  r.score = chosen->best;
  return r;
}

void enumerate(const SearchProblem& pb, const PathState& ps, std::vector<int>& rest,
               StatsTable& table, int& leaves) {
  if (rest.empty()) {
    ++leaves;
    if (ps.n_action) table.add(*ps.n_action, final_value(pb, ps));
    return;
  }
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const int j = rest[i];
    PathState next = ps;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    if (advance(pb, next, j)) {
      enumerate(pb, next, rest, table, leaves);
    } else {
      ++leaves;
      if (next.n_action) table.add(*next.n_action, final_value(pb, next));
    }
    rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(i), j);
  }
}

}  // namespace

PathOutcome evaluate_order(const SearchProblem& pb, const std::vector<int>& order) {
  PathState ps{pb.state};
  for (int j : order) {
    if (!advance(pb, ps, j)) break;
  }
  return PathOutcome{final_value(pb, ps), ps.legal, ps.n_action};
}

SearchResult brute_force_permutation(const SearchProblem& pb) {
  if (pb.items.empty()) throw NoFeasible();
  std::vector<int> rest(pb.items.size());
  std::iota(rest.begin(), rest.end(), 0);
  StatsTable table;
  int leaves = 0;
  enumerate(pb, PathState{pb.state}, rest, table, leaves);
  return pick(table, leaves);
}

namespace {

struct Node {
  int parent = -1;
  PathState path;
  std::vector<int> unselected;  // window indices in arrival order
  std::vector<int> child;       // per window index, -1 if not expanded
  bool terminal = false;
  double terminal_value = 0.0;
  int visits = 0;
  double value_sum = 0.0;
};

class Tree {
 public:
  Tree(const SearchProblem& pb, SamplerKind sampler, double c, std::uint64_t seed)
      : pb_(pb), sampler_(sampler), c_(c), rng_(seed) {
    Node root;
    root.path = PathState{pb.state};
    root.unselected.resize(pb.items.size());
    std::iota(root.unselected.begin(), root.unselected.end(), 0);
    root.child.assign(pb.items.size(), -1);
    nodes_.push_back(std::move(root));
  }

  void simulate() {
    int cur = 0;
    double value = 0.0;
    std::optional<Action> n_action;
    for (;;) {
      Node& node = nodes_[static_cast<std::size_t>(cur)];
      if (node.terminal) {
        value = node.terminal_value;
        n_action = node.path.n_action;
        break;
      }
      const int x = sample_next_item(sampler_, static_cast<int>(node.unselected.size()), rng_);
      const int item = node.unselected[static_cast<std::size_t>(x)];
      if (node.child[static_cast<std::size_t>(item)] < 0) {
        const int id = expand(cur, item);
        Node& fresh = nodes_[static_cast<std::size_t>(id)];
        if (fresh.terminal) {
          value = fresh.terminal_value;
          n_action = fresh.path.n_action;
        } else {
          PathState end = fresh.path;
          std::vector<int> rest = fresh.unselected;
          rollout(end, rest);
          value = final_value(pb_, end);
          n_action = end.n_action;
        }
        cur = id;
        break;
      }
      const bool full = std::all_of(node.unselected.begin(), node.unselected.end(), [&](int j) {
        return node.child[static_cast<std::size_t>(j)] >= 0;
      });
      cur = full ? select(cur) : node.child[static_cast<std::size_t>(item)];
    }
    for (int id = cur; id >= 0; id = nodes_[static_cast<std::size_t>(id)].parent) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      ++n.visits;
      n.value_sum += value;
    }
    lo_ = std::min(lo_, value);
    hi_ = std::max(hi_, value);
    if (n_action) stats_.add(*n_action, value);
  }

  [[nodiscard]] const StatsTable& stats() const { return stats_; }
  [[nodiscard]] int root_visits() const { return nodes_.front().visits; }

 private:
  int expand(int parent, int item) {
    Node n;
    n.parent = parent;
    {
      const Node& p = nodes_[static_cast<std::size_t>(parent)];
      n.path = p.path;
      n.unselected = p.unselected;
      n.child.assign(pb_.items.size(), -1);
    }
    n.unselected.erase(std::find(n.unselected.begin(), n.unselected.end(), item));
    if (!advance(pb_, n.path, item) || n.unselected.empty()) {
      n.terminal = true;
      n.terminal_value = final_value(pb_, n.path);
    }
    const auto id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    nodes_[static_cast<std::size_t>(parent)].child[static_cast<std::size_t>(item)] = id;
    return id;
  }

  void rollout(PathState& ps, std::vector<int>& rest) {
    while (!rest.empty()) {
      const int x = sample_next_item(sampler_, static_cast<int>(rest.size()), rng_);
      const int item = rest[static_cast<std::size_t>(x)];
      rest.erase(rest.begin() + x);
      if (!advance(pb_, ps, item)) return;
    }
  }

  // Upper-confidence choice with values min-max normalized over the tree.
  int select(int id) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const double range = hi_ - lo_;
    const double log_n = std::log(static_cast<double>(std::max(1, node.visits)));
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int j : node.unselected) {
      const Node& ch = nodes_[static_cast<std::size_t>(node.child[static_cast<std::size_t>(j)])];
      const double mean = ch.value_sum / ch.visits;
      const double q = range > 0 ? (mean - lo_) / range : 0.5;
      const double score = q + c_ * std::sqrt(log_n / ch.visits);
      if (score > best_score) {
        best_score = score;
        best = node.child[static_cast<std::size_t>(j)];
      }
    }
    return best;
  }

  const SearchProblem& pb_;
  SamplerKind sampler_;
  double c_;
  Rng rng_;
  std::vector<Node> nodes_;
  StatsTable stats_;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

SearchResult mcts_search(const SearchProblem& pb, const SearchBudget& budget, SamplerKind sampler,
                         double exploration) {
  if (budget.m < 1 || budget.clones < 1) throw Error("search budget must be positive");
  if (pb.items.empty()) throw NoFeasible();
  const int per_clone = (budget.m + budget.clones - 1) / budget.clones;
  std::vector<StatsTable> tables(static_cast<std::size_t>(budget.clones));
  std::vector<int> visits(static_cast<std::size_t>(budget.clones), 0);
  auto run = [&](int c) {
    Tree tree(pb, sampler, exploration, splitmix(budget.seed + static_cast<std::uint64_t>(c)));
    for (int i = 0; i < per_clone; ++i) tree.simulate();
    tables[static_cast<std::size_t>(c)] = tree.stats();
    visits[static_cast<std::size_t>(c)] = tree.root_visits();
  };
  if (budget.clones == 1) {
    run(0);
  } else {
    std::vector<std::thread> workers;
    for (int c = 0; c < budget.clones; ++c) workers.emplace_back(run, c);
    for (auto& w : workers) w.join();
  }
  StatsTable merged;
  int total = 0;
  for (int c = 0; c < budget.clones; ++c) {
    merged.merge(tables[static_cast<std::size_t>(c)]);
    total += visits[static_cast<std::size_t>(c)];
  }
  return pick(merged, total);
}

PolicyDecision MctsPolicy::decide(const Episode& episode) {
  if (episode.done()) throw NoFeasible();
  SearchBudget b = budget_;
  b.seed = splitmix(budget_.seed ^ (static_cast<std::uint64_t>(episode.cursor()) << 32));
  std::vector<ActionStats> stats;
  try {
    stats = mcts_search(SearchProblem::from_episode(episode), b, sampler_).stats;
  } catch (const NoFeasible&) {
    // every simulated path failed before placing n
  }
  // The search tests n on a state that also carries tiny virtual loads; the
  // committed action must still be valid under the episode's own mask.
  std::stable_sort(stats.begin(), stats.end(),
                   [](const ActionStats& a, const ActionStats& c) { return a.best > c.best; });
  for (const ActionStats& s : stats) {
    if (episode.mask(s.action.o).at(s.action.x, s.action.y)) {
      return PolicyDecision{s.action, 0, s.best};
    }
  }
  // Samplers that favour late items can fill every cell n could use before n
  // is placed; n still fits, so place it greedily.
  const std::array<FeasibilityMask, 2> masks{episode.mask(Orientation::kAsIs),
                                             episode.mask(Orientation::kSwapped)};
  PlacementQuery q;
  q.mode = episode.mode();
  q.params = episode.params();
  q.masks = &masks;
  const auto best = best_placement(episode.state(), episode.lookahead().front(), q);
  if (!best) throw NoFeasible();
  return PolicyDecision{best->placement.action(), 0, best->score};
}

}  // namespace pack3d
