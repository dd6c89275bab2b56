#include <benchmark/benchmark.h>

#include "pack3d/equilibrium.hpp"
#include "pack3d/search.hpp"
#include "pack3d/stability_bench.hpp"
#include "pack3d/state.hpp"

namespace {

using namespace pack3d;

const BinConfig kBin100{100, 100, 100, 1.0};

PackingState grown_pile(const BinConfig& bin, int n, std::uint64_t seed) {
  const ItemRegistry reg = ItemRegistry::default_for(kBin100);
  Rng rng(seed);
  PackingState s(bin);
  for (int i = 0; i < n; ++i) {
    const Item it = Item::with_unit_density(i, reg.types[uniform_below(rng, reg.types.size())]);
    const auto p = sample_accepted(s, it, BenchMethod::kFullTree, rng, 256);
    if (!p) break;
    s.place(it, p->action(), StabilityMode::kFullTree);
  }
  return s;
}

std::vector<Placement> candidates(const PackingState& s, int count, std::uint64_t seed) {
  const ItemRegistry reg = ItemRegistry::default_for(kBin100);
  Rng rng(seed);
  std::vector<Placement> out;
  while (static_cast<int>(out.size()) < count) {
    const Item it = Item::with_unit_density(999, reg.types[uniform_below(rng, reg.types.size())]);
    const Action a{static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(s.bin().length - it.dims.l + 1))),
                   static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(s.bin().width - it.dims.w + 1))),
                   Orientation::kAsIs};
    if (auto p = s.locate(it, a)) out.push_back(*p);
  }
  return out;
}

void BM_StabilityCheck(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mode = state.range(1) == 0 ? StabilityMode::kFullTree : StabilityMode::kCurrentOnly;
  const PackingState s = grown_pile(scaled_bin(n), n, 3);
  const std::vector<Placement> cand = candidates(s, 256, 4);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.check(cand[i++ % cand.size()], mode));
  }
  state.counters["items"] = static_cast<double>(s.placements().size());
}
BENCHMARK(BM_StabilityCheck)->ArgsProduct({{25, 50, 100, 200}, {0, 1}});

void BM_FeasibilityMask(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BinConfig bin{side, side, 100, 1.0};
  const PackingState s = grown_pile(bin, static_cast<int>(state.range(1)), 5);
  const Item it = Item::with_unit_density(999, Dims{20, 30, 20});
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.mask(it, Orientation::kAsIs, StabilityMode::kFullTree));
  }
}
BENCHMARK(BM_FeasibilityMask)->Args({100, 10})->Args({100, 30})->Unit(benchmark::kMicrosecond);

void BM_EquilibriumOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PackingState s = grown_pile(scaled_bin(n), n, 6);
  const std::vector<Placement> cand = candidates(s, 64, 7);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(equilibrium_oracle(s.tree(), s.hmap(), cand[i++ % cand.size()]));
  }
}
BENCHMARK(BM_EquilibriumOracle)->Arg(25)->Arg(100)->Unit(benchmark::kMicrosecond);

SearchProblem lookahead_problem(int k) {
  const BinConfig bin{10, 10, 10, 1.0};
  const ItemRegistry reg = ItemRegistry::default_for(bin);
  Rng rng(8);
  SearchProblem pb;
  pb.state = PackingState(bin);
  for (int i = 0; i < k; ++i) {
    pb.items.push_back(Item::with_unit_density(i, reg.types[uniform_below(rng, reg.types.size())]));
  }
  return pb;
}

void BM_MctsSearch(benchmark::State& state) {
  const SearchProblem pb = lookahead_problem(static_cast<int>(state.range(0)));
  const int m = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcts_search(pb, SearchBudget{m, 1, 1}, SamplerKind::kNormal));
  }
}
BENCHMARK(BM_MctsSearch)->ArgsProduct({{3, 5, 8}, {100, 600}})->Unit(benchmark::kMillisecond);

void BM_BruteForcePermutation(benchmark::State& state) {
  const SearchProblem pb = lookahead_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_permutation(pb));
}
BENCHMARK(BM_BruteForcePermutation)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
