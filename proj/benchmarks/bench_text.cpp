#include <benchmark/benchmark.h>

#include <string>

#include "contraforge/corpus.hpp"
#include "contraforge/text.hpp"

using namespace contraforge;

static void BM_SegmentSentences(benchmark::State& state) {
  std::string body;
  for (int p = 0; p < state.range(0); ++p) {
    body += "Dr. Park signs for the U.S. office on March 1, 2024. The fee is $12.5 million. "
            "Appendix B lists exceptions. Does it apply globally? Yes!\n\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(segment_sentences(body));
  state.SetBytesProcessed(state.iterations() * static_cast<long>(body.size()));
}
BENCHMARK(BM_SegmentSentences)->Arg(10)->Arg(200);

static void BM_PairKey(benchmark::State& state) {
  const std::string a = "Training for all new engineers starts on January 15, 2024.";
  const std::string b = "Training for all new engineers starts at the end of Q1 2024.";
  for (auto _ : state) benchmark::DoNotOptimize(pair_key(a, b, Mode::Self));
}
BENCHMARK(BM_PairKey);
