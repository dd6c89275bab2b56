#include "pack3d/stability_bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "pack3d/equilibrium.hpp"
#include "pack3d/heuristic_rule.hpp"
#include "pack3d/policy.hpp"

namespace pack3d {

const char* to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::kFullTree: return "full";
    case BenchMethod::kCurrentOnly: return "current-only";
    case BenchMethod::kHeuristic: return "heuristic";
  }
  return "full";
}

namespace {

using Clock = std::chrono::steady_clock;

StabilityMode tree_mode(BenchMethod m) {
  return m == BenchMethod::kFullTree ? StabilityMode::kFullTree : StabilityMode::kCurrentOnly;
}

double percentile(std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

// Uniform (o, x, y) whose footprint fits and whose top stays within H.
std::optional<Placement> random_candidate(const PackingState& state, const Item& item, Rng& rng) {
  const BinConfig& bin = state.bin();
  const std::vector<Orientation> os = distinct_orientations(item.dims);
  for (int i = 0; i < 64; ++i) {
    const Orientation o = os[uniform_below(rng, os.size())];
    const Dims d = oriented(item.dims, o);
    if (d.l > bin.length || d.w > bin.width) continue;
    const Action a{static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.length - d.l + 1))),
                   static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.width - d.w + 1))),
                   o};
    if (auto p = state.locate(item, a)) return p;
  }
  return std::nullopt;
}

}  // namespace

bool method_accepts(const PackingState& state, const Placement& p, BenchMethod method) {
  if (method == BenchMethod::kHeuristic) return heuristic_rule_stable(state.hmap(), p.footprint());
  return state.check(p, tree_mode(method)).verdict == Verdict::kStable;
}

std::optional<Placement> sample_accepted(const PackingState& state, const Item& item,
                                         BenchMethod method, Rng& rng, int attempts,
                                         std::vector<double>* check_us) {
  const BinConfig& bin = state.bin();
  const std::vector<Orientation> os = distinct_orientations(item.dims);
  auto timed = [&](const Placement& p) {
    const auto t0 = Clock::now();
    const bool ok = method_accepts(state, p, method);
    if (check_us) {
      check_us->push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
    }
    return ok;
  };
  for (int i = 0; i < attempts; ++i) {
    const Orientation o = os[uniform_below(rng, os.size())];
    const Dims d = oriented(item.dims, o);
    if (d.l > bin.length || d.w > bin.width) continue;
    const Action a{static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.length - d.l + 1))),
                   static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bin.width - d.w + 1))),
                   o};
    const auto p = state.locate(item, a);
    if (p && timed(*p)) return p;
  }
  // Few valid cells: enumerate them all and pick one uniformly.
  std::vector<Placement> valid;
  for (Orientation o : os) {
    const FeasibilityMask hm = state.height_mask(item, o);
    for (int x = 0; x < hm.length; ++x) {
      for (int y = 0; y < hm.width; ++y) {
        if (!hm.at(x, y)) continue;
        const auto p = state.locate(item, Action{x, y, o});
        if (p && timed(*p)) valid.push_back(*p);
      }
    }
  }
  if (valid.empty()) return std::nullopt;
  return valid[uniform_below(rng, valid.size())];
}

TreeDiff compare_trees(const StackingTree& a, const StackingTree& b) {
  TreeDiff d;
  if (a.size() != b.size()) {
    ++d.mismatches;
    return d;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const StackNode& x = a.node(i);
    const StackNode& y = b.node(i);
    if (x.supports.size() != y.supports.size()) {
      ++d.mismatches;
      continue;
    }
    const Point2 cx = x.group_centroid();
    const Point2 cy = y.group_centroid();
    d.max_centroid = std::max({d.max_centroid, std::abs(cx.x - cy.x), std::abs(cx.y - cy.y)});
    d.max_flow = std::max(d.max_flow, std::abs(x.group_mass - y.group_mass));
    for (std::size_t e = 0; e < x.supports.size(); ++e) {
      const SupportEdge& ex = x.supports[e];
      const SupportEdge& ey = y.supports[e];
      if (!(ex.region == ey.region)) ++d.mismatches;
      d.max_flow = std::max({d.max_flow, std::abs(ex.flow - ey.flow),
                             std::abs(ex.moment.x - ey.moment.x) / std::max(1.0, std::abs(ey.moment.x)),
                             std::abs(ex.moment.y - ey.moment.y) / std::max(1.0, std::abs(ey.moment.y))});
    }
  }
  return d;
}

MethodStats run_method(const StabilityBenchOptions& opt, BenchMethod method,
                       StabilityBenchReport* report) {
  const ItemRegistry registry = opt.registry ? *opt.registry : ItemRegistry::default_for(opt.bin);
  MethodStats st;
  st.method = method;
  std::vector<double> check_us;
  long long touched_sum = 0;
  long long touched_n = 0;
  long long items_sum = 0;
  for (int s = 0; s < opt.stacks; ++s) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(s);
    const ItemSequence seq = generate_rs(registry, opt.bin, seed);
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(method));
    PackingState state(opt.bin);
    int placed = 0;
    for (const Item& item : seq.items) {
      if (placed >= opt.items) break;
      if (const auto c = random_candidate(state, item, rng)) {
        const bool says = method_accepts(state, *c, method);
        const bool truth = equilibrium_oracle(state.tree(), state.hmap(), *c);
        ++st.candidates;
        if (says == truth) ++st.candidate_agree;
        if (says && !truth) ++st.false_stable;
        if (!says && truth) ++st.false_unstable;
      }
      const auto p = sample_accepted(state, item, method, rng, opt.rejection_attempts, &check_us);
      if (!p) break;
      ++st.placements;
      const bool stable = equilibrium_oracle(state.tree(), state.hmap(), *p);
      if (method == BenchMethod::kFullTree) {
        touched_sum += state.check(*p, StabilityMode::kFullTree).touched;
        ++touched_n;
      }
      if (!stable) {
        ++st.collapsed_stacks;
        break;
      }
      ++st.oracle_stable;
      state.force_place(item, p->action(), tree_mode(method));
      ++placed;
    }
    items_sum += placed;
    if (report && method == BenchMethod::kFullTree) {
      const RecomputeResult rr =
          full_recompute(opt.bin, state.placements(), StabilityMode::kFullTree);
      if (rr.verdict != Verdict::kStable) ++report->recompute_mismatches;
      const TreeDiff d = compare_trees(state.tree(), rr.tree);
      report->max_flow_deviation = std::max(report->max_flow_deviation, d.max_flow);
      report->max_centroid_deviation = std::max(report->max_centroid_deviation, d.max_centroid);
      report->recompute_mismatches += d.mismatches;
    }
  }
  st.candidate_agreement = st.candidates ? static_cast<double>(st.candidate_agree) /
                                               static_cast<double>(st.candidates)
                                         : 1.0;
  st.agreement = st.placements ? static_cast<double>(st.oracle_stable) /
                                     static_cast<double>(st.placements)
                               : 1.0;
  if (!check_us.empty()) {
    double sum = 0.0;
    for (double v : check_us) sum += v;
    st.mean_check_us = sum / static_cast<double>(check_us.size());
    st.p50_check_us = percentile(check_us, 0.50);
    st.p90_check_us = percentile(check_us, 0.90);
    st.p99_check_us = percentile(check_us, 0.99);
  }
  st.mean_touched = touched_n ? static_cast<double>(touched_sum) / static_cast<double>(touched_n) : 0.0;
  st.mean_stack_items = opt.stacks ? static_cast<double>(items_sum) / opt.stacks : 0.0;
  return st;
}

StabilityBenchReport run_stability_bench(const StabilityBenchOptions& opt) {
  const auto t0 = Clock::now();
  StabilityBenchReport report;
  for (std::size_t i = 0; i < 3; ++i) {
    report.methods[i] = run_method(opt, kBenchMethods[i], &report);
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

BinConfig scaled_bin(int n) {
  // Floor area for N random placements of 30^3-average items at about 15%
  // fill of a 100-high bin, rounded up to a multiple of 10.
  const double side = std::sqrt(static_cast<double>(n) * 27000.0 / (0.15 * 100.0));
  const int l = static_cast<int>(std::ceil(side / 10.0)) * 10;
  return BinConfig{l, l, 100, 1.0};
}

ScalingPoint run_scaling_point(int n, int stacks, std::uint64_t seed) {
  ScalingPoint pt;
  pt.n = n;
  pt.bin = scaled_bin(n);
  const ItemRegistry registry = ItemRegistry::default_for(BinConfig{100, 100, 100, 1.0});
  long long touched = 0;
  long long placements = 0;
  long long reached = 0;
  std::vector<double> final_checks;
  long long final_touched = 0;
  for (int s = 0; s < stacks; ++s) {
    Rng rng(seed + static_cast<std::uint64_t>(s));
    PackingState state(pt.bin);
    ItemSequence seq;
    int placed = 0;
    while (placed < n) {
      const Dims d = registry.types[uniform_below(rng, registry.types.size())];
      const Item item = Item::with_unit_density(placed, d);
      const auto p = sample_accepted(state, item, BenchMethod::kFullTree, rng, 256);
      if (!p) break;
      touched += state.place(item, p->action(), StabilityMode::kFullTree).touched;
      ++placements;
      ++placed;
    }
    reached += placed;
    // Time checks of random height-feasible candidates on the final pile.
    for (int c = 0; c < 64; ++c) {
      const Dims d = registry.types[uniform_below(rng, registry.types.size())];
      const Item item = Item::with_unit_density(placed, d);
      const Action a{static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(pt.bin.length - d.l + 1))),
                     static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(pt.bin.width - d.w + 1))),
                     Orientation::kAsIs};
      const auto p = state.locate(item, a);
      if (!p) continue;
      const auto t0 = Clock::now();
      const auto r = state.check(*p, StabilityMode::kFullTree);
      final_checks.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
      final_touched += r.touched;
    }
  }
  pt.reached = static_cast<int>(reached / std::max(1, stacks));
  pt.mean_touched = placements ? static_cast<double>(touched) / static_cast<double>(placements) : 0.0;
  if (!final_checks.empty()) {
    double sum = 0.0;
    for (double v : final_checks) sum += v;
    pt.mean_check_us = sum / static_cast<double>(final_checks.size());
    pt.final_touched = static_cast<double>(final_touched) / static_cast<double>(final_checks.size());
  }
  return pt;
}

std::string bench_report_json(const StabilityBenchReport& r) {
  using nlohmann::json;
  json methods = json::array();
  for (const MethodStats& m : r.methods) {
    methods.push_back({{"method", to_string(m.method)},
                       {"placements", m.placements},
                       {"oracle_stable", m.oracle_stable},
                       {"agreement", m.agreement},
                       {"collapsed_stacks", m.collapsed_stacks},
                       {"mean_stack_items", m.mean_stack_items},
                       {"check_us", {{"mean", m.mean_check_us},
                                     {"p50", m.p50_check_us},
                                     {"p90", m.p90_check_us},
                                     {"p99", m.p99_check_us}}},
                       {"mean_touched", m.mean_touched},
                       {"candidates", {{"count", m.candidates},
                                       {"agreement", m.candidate_agreement},
                                       {"false_stable", m.false_stable},
                                       {"false_unstable", m.false_unstable}}}});
  }
  const json doc = {{"methods", methods},
                    {"incremental_vs_recompute",
                     {{"max_flow_deviation", r.max_flow_deviation},
                      {"max_centroid_deviation", r.max_centroid_deviation},
                      {"mismatches", r.recompute_mismatches}}},
                    {"seconds", r.seconds}};
  return doc.dump(2);
}

}  // namespace pack3d
