#include <benchmark/benchmark.h>

#include <random>

#include "contraforge/agreement.hpp"

using namespace contraforge;

namespace {

LabelMatrix random_labels(std::size_t annotators, std::size_t items, double missing) {
  std::mt19937 rng(11);
  std::bernoulli_distribution one(0.4);
  std::bernoulli_distribution gap(missing);
  LabelMatrix m(annotators);
  for (auto& row : m) {
    for (std::size_t i = 0; i < items; ++i) {
      row.push_back(gap(rng) ? std::nullopt : std::optional<int>(one(rng)));
    }
  }
  return m;
}

}  // namespace

static void BM_CohenKappa(benchmark::State& state) {
  const auto m = random_labels(2, static_cast<std::size_t>(state.range(0)), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(cohen_kappa(m[0], m[1]));
}
BENCHMARK(BM_CohenKappa)->Arg(100)->Arg(10000);

static void BM_KrippAlpha(benchmark::State& state) {
  const auto m = random_labels(4, static_cast<std::size_t>(state.range(0)), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(kripp_alpha(m));
}
BENCHMARK(BM_KrippAlpha)->Arg(100)->Arg(10000);
