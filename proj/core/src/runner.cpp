#include "pack3d/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "pack3d/equilibrium.hpp"

namespace pack3d {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  return x ^ (x >> 33);
}

Aggregate aggregate(const std::vector<double>& v) {
  Aggregate a;
  if (v.empty()) return a;
  for (double x : v) a.mean += x;
  a.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return a;
}

// Replays the placements on a fresh state and counts any that would not have
// been feasible at their position.
int replay_violations(const BinConfig& bin, const std::vector<Placement>& placements,
                      StabilityMode mode) {
  PackingState s(bin);
  int bad = 0;
  for (const Placement& p : placements) {
    const Action a = p.action();
    if (!s.feasible(p.item, a, mode)) ++bad;
    s.force_place(p.item, a, mode);
  }
  return bad;
}

}  // namespace

bool audit_selected(std::uint64_t seed, int step, double rate) {
  if (rate <= 0.0) return false;
  if (rate >= 1.0) return true;
  const std::uint64_t h = mix(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(step));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < rate;
}

EpisodeRecord run_episode(const ItemSequence& sequence, const RunOptions& options) {
  EpisodeRecord rec;
  rec.seed = sequence.seed;
  rec.provenance = to_string(sequence.provenance);
  rec.policy = options.policy;
  rec.k = options.k;
  const auto start = std::chrono::steady_clock::now();
  try {
    PolicyOptions po = options.policy_options;
    po.seed = mix(po.seed ^ (sequence.seed + 0x51ED27ULL));
    auto policy = make_policy(options.policy, po);
    Episode ep(sequence.bin, sequence, options.k, options.mode, options.params,
               policy->reorders());
    int step = 0;
    while (!ep.done()) {
      const PolicyDecision d = policy->decide(ep);
      if (audit_selected(sequence.seed, step, options.oracle_audit_rate)) {
        const Item item = ep.lookahead()[static_cast<std::size_t>(d.item_offset)];
        if (const auto p = ep.state().locate(item, d.action)) {
          ++rec.oracle_checks;
          if (!equilibrium_oracle(ep.state().tree(), ep.state().hmap(), *p)) {
            ++rec.oracle_violations;
          }
        }
      }
      ep.step_item(d.item_offset, d.action);
      ++step;
    }
    const EpisodeMetrics m = ep.metrics();
    rec.space_utilization = m.utilization;
    rec.item_count = m.item_count;
    rec.stability_violations =
        m.refused + replay_violations(sequence.bin, ep.state().placements(), options.mode);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void RunReport::finalize() {
  std::vector<double> u;
  std::vector<double> n;
  std::vector<double> t;
  stability_violations = oracle_checks = oracle_violations = 0;
  for (const EpisodeRecord& e : episodes) {
    u.push_back(e.space_utilization);
    n.push_back(e.item_count);
    t.push_back(e.wall_time);
    stability_violations += e.stability_violations;
    oracle_checks += e.oracle_checks;
    oracle_violations += e.oracle_violations;
  }
  utilization = aggregate(u);
  item_count = aggregate(n);
  wall_time = aggregate(t);
}

RunReport run_sequences(const std::vector<ItemSequence>& sequences, const RunOptions& options) {
  RunReport report;
  report.options = options;
  report.episodes.resize(sequences.size());
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(1, options.workers)), sequences.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sequences.size(); i = next++) {
      report.episodes[i] = run_episode(sequences[i], options);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  report.finalize();
  return report;
}

std::string report_json(const RunReport& r) {
  using nlohmann::json;
  json eps = json::array();
  for (const EpisodeRecord& e : r.episodes) {
    json j = {{"seed", e.seed},
              {"provenance", e.provenance},
              {"policy", e.policy},
              {"k", e.k},
              {"space_utilization", e.space_utilization},
              {"item_count", e.item_count},
              {"wall_time", e.wall_time},
              {"stability_violations", e.stability_violations},
              {"oracle_checks", e.oracle_checks},
              {"oracle_violations", e.oracle_violations}};
    if (!e.error.empty()) j["error"] = e.error;
    eps.push_back(std::move(j));
  }
  auto agg = [](const Aggregate& a) { return json{{"mean", a.mean}, {"stddev", a.stddev}}; };
  const json doc = {
      {"policy", r.options.policy},
      {"k", r.options.k},
      {"stability", to_string(r.options.mode)},
      {"mcts", {{"m", r.options.policy_options.mcts_m},
                {"clones", r.options.policy_options.mcts_clones},
                {"sampler", r.options.policy_options.sampler}}},
      {"episodes", eps},
      {"aggregate",
       {{"space_utilization", agg(r.utilization)},
        {"item_count", agg(r.item_count)},
        {"wall_time", agg(r.wall_time)},
        {"stability_violations", r.stability_violations},
        {"oracle_checks", r.oracle_checks},
        {"oracle_violations", r.oracle_violations}}}};
  return doc.dump(2);
}

void print_report_table(std::ostream& out, const RunReport& r) {
  out << std::left << std::setw(8) << "seed" << std::setw(8) << "dist" << std::setw(12)
      << "space uti." << std::setw(9) << "# items" << std::setw(10) << "time(s)"
      << "violations\n";
  out << std::fixed;
  for (const EpisodeRecord& e : r.episodes) {
    out << std::setw(8) << e.seed << std::setw(8) << e.provenance << std::setw(12)
        << std::setprecision(3) << e.space_utilization << std::setw(9) << e.item_count
        << std::setw(10) << std::setprecision(3) << e.wall_time << e.stability_violations;
    if (!e.error.empty()) out << "  error: " << e.error;
    out << '\n';
  }
  out << "policy " << r.options.policy << " k=" << r.options.k << " ("
      << to_string(r.options.mode) << "), " << r.episodes.size() << " episodes\n";
  out << std::setprecision(1) << "space uti. " << 100.0 * r.utilization.mean << "% +- "
      << 100.0 * r.utilization.stddev << "   # items " << r.item_count.mean << " +- "
      << r.item_count.stddev << "   violations " << r.stability_violations;
  if (r.oracle_checks > 0) {
    out << "   oracle " << r.oracle_checks - r.oracle_violations << "/" << r.oracle_checks;
  }
  out << '\n';
}

}  // namespace pack3d
