#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pack3d/grid.hpp"

namespace pack3d {

/// Admissible item dimensions.
struct ItemRegistry {
  std::vector<Dims> types;

  /// Five sizes per axis, k * extent / 10 for k = 1..5: for a 100^3 bin the
  /// 125 types {10, 20, 30, 40, 50}^3.
  static ItemRegistry default_for(const BinConfig& bin);
  /// Every combination of the given per-axis sizes.
  static ItemRegistry product(const std::vector<int>& ls, const std::vector<int>& ws,
                              const std::vector<int>& hs);

  [[nodiscard]] bool contains(const Dims& d) const;
  /// Throws Error unless every type is within half of each bin extent.
  void validate_for(const BinConfig& bin) const;
};

enum class Provenance : std::uint8_t { kRS, kCut1, kCut2, kCustom };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& text);

/// Deterministic engine used everywhere a seed is given.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection, identical on every platform.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);
/// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(Rng& rng);

struct CutPosition {
  int x = 0;
  int y = 0;
  int z = 0;
};

struct ItemSequence {
  std::vector<Item> items;
  Provenance provenance = Provenance::kCustom;
  std::uint64_t seed = 0;
  BinConfig bin;
  /// FLB of each item in the cut layout, orientation 0; empty for RS.
  std::vector<CutPosition> positions;

  [[nodiscard]] long long total_volume() const;
};

/// I.i.d. uniform draws until the cumulative volume first reaches the bin
/// volume.
ItemSequence generate_rs(const ItemRegistry& registry, const BinConfig& bin, std::uint64_t seed);

/// Recursive guillotine partition of the whole bin into registry cuboids.
/// CUT-1 orders the pieces by FLB (z, y, x); CUT-2 emits a random order in
/// which every piece follows everything it rests on. Throws CutFailure after
/// a bounded number of failed attempts.
ItemSequence generate_cut(const ItemRegistry& registry, const BinConfig& bin,
                          std::uint64_t seed, Provenance variant);

ItemSequence generate(const ItemRegistry& registry, const BinConfig& bin, std::uint64_t seed,
                      Provenance dist);

/// Pieces that `i` rests on directly (its bottom face touches their top).
std::vector<std::vector<int>> rests_on(const ItemSequence& seq);

/// One header record then one record per item, each a JSON object per line.
void write_sequence(std::ostream& out, const ItemSequence& seq);
ItemSequence read_sequence(std::istream& in);
void save_sequence(const std::string& path, const ItemSequence& seq);
ItemSequence load_sequence(const std::string& path);

}  // namespace pack3d
