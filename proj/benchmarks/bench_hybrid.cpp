#include <benchmark/benchmark.h>

#include "contraforge/mining.hpp"

using namespace contraforge;

// Full 101x101 confidence grid over the four label combinations.
static void BM_HybridGrid(benchmark::State& state) {
  for (auto _ : state) {
    int flagged = 0;
    for (int a = 0; a <= 100; ++a) {
      for (int b = 0; b <= 100; ++b) {
        for (int l = 0; l < 4; ++l) {
          flagged += hybrid_score(l & 1, a / 100.0, l >> 1, b / 100.0).label;
        }
      }
    }
    benchmark::DoNotOptimize(flagged);
  }
  state.SetItemsProcessed(state.iterations() * 101 * 101 * 4);
}
BENCHMARK(BM_HybridGrid);
