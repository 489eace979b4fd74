#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "ncache/tuning.hpp"

namespace {

using namespace ncache;

HiddenTrace random_trace(std::size_t positions, std::size_t dim) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0.0f, 0.3f);
  HiddenTrace t;
  t.dim = dim;
  t.queries.resize(positions * dim);
  for (auto& x : t.queries) x = n(rng);
  for (std::size_t i = 0; i < positions; ++i) {
    t.inputs.push_back(static_cast<TokenId>(rng() % 2000));
    t.targets.push_back(static_cast<TokenId>(rng() % 2000));
    t.target_logit.push_back(0.0);
    t.log_normalizer.push_back(std::log(2000.0));
  }
  return t;
}

// Full default grid for one mode over a 10k-position trace.
void BM_Sweep(benchmark::State& state) {
  const HiddenTrace trace = random_trace(10000, 128);
  SweepSpec spec = SweepSpec::defaults(state.range(0) == 0 ? BlendMode::linear : BlendMode::global);
  spec.capacity_grid = {100, 500, 2000};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(trace, spec).best.perplexity);
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_UnigramSweep(benchmark::State& state) {
  const HiddenTrace trace = random_trace(10000, 128);
  const SweepSpec spec = SweepSpec::defaults(BlendMode::linear);
  for (auto _ : state) {
    benchmark::DoNotOptimize(unigram_sweep(trace, spec.capacity_grid, spec.mix_grid, BlendMode::linear));
  }
}
BENCHMARK(BM_UnigramSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
