#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "contraforge/mining.hpp"

using namespace contraforge;

namespace {

std::vector<Embedding> unit_vectors(std::size_t n, std::size_t dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Embedding> out(n, Embedding(dim));
  for (auto& v : out) {
    double norm = 0.0;
    for (auto& x : v) {
      x = g(rng);
      norm += x * x;
    }
    for (auto& x : v) x /= std::sqrt(norm);
  }
  return out;
}

}  // namespace

// Self-mode retrieval over n chunks of one document.
static void BM_TopKSelf(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto vecs = unit_vectors(n, 384, 7);
  std::vector<EmbeddedChunk> chunks;
  for (std::size_t i = 0; i < n; ++i) chunks.push_back({"doc", "chunk " + std::to_string(i), &vecs[i]});
  MiningConfig cfg;
  cfg.theta_s = 0.0;
  for (auto _ : state) {
    auto pairs = top_k_pairs(chunks, chunks, Mode::Self, cfg);
    benchmark::DoNotOptimize(pairs);
  }
  state.SetComplexityN(static_cast<long>(n));
}
BENCHMARK(BM_TopKSelf)->RangeMultiplier(2)->Range(25, 400)->Complexity();
