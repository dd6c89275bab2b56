#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pack3d/env.hpp"
#include "pack3d/policy.hpp"

namespace pack3d {

struct RunOptions {
  std::string policy = "greedy";
  int k = 1;
  StabilityMode mode = StabilityMode::kFullTree;
  PolicyOptions policy_options;
  RewardParams params;
  /// Fraction of placements re-checked with the equilibrium oracle.
  double oracle_audit_rate = 0.0;
  /// Episodes run concurrently; records keep sequence order.
  int workers = 1;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::string provenance;
  std::string policy;
  int k = 1;
  double space_utilization = 0.0;
  int item_count = 0;
  double wall_time = 0.0;  // seconds
  /// Refused actions plus placements that fail a post-hoc feasibility replay.
  int stability_violations = 0;
  int oracle_checks = 0;
  int oracle_violations = 0;
  std::string error;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
};

struct RunReport {
  RunOptions options;
  std::vector<EpisodeRecord> episodes;
  Aggregate utilization;
  Aggregate item_count;
  Aggregate wall_time;
  long long stability_violations = 0;
  long long oracle_checks = 0;
  long long oracle_violations = 0;

  void finalize();
};

/// True for roughly `rate` of (seed, step) pairs, deterministically.
bool audit_selected(std::uint64_t seed, int step, double rate);

EpisodeRecord run_episode(const ItemSequence& sequence, const RunOptions& options);
RunReport run_sequences(const std::vector<ItemSequence>& sequences, const RunOptions& options);

std::string report_json(const RunReport& report);
void print_report_table(std::ostream& out, const RunReport& report);

}  // namespace pack3d
