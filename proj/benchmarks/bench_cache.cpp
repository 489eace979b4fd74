#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ncache/blend.hpp"
#include "ncache/neural_cache.hpp"

namespace {

using ncache::NeuralCache;
using ncache::TokenId;

NeuralCache filled_cache(std::size_t capacity, std::size_t dim, double theta) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n(0.0f, 0.3f);
  NeuralCache cache(capacity, dim, theta);
  std::vector<float> key(dim);
  for (std::size_t i = 0; i < capacity; ++i) {
    for (auto& x : key) x = n(rng);
    cache.push(key, static_cast<TokenId>(rng() % 10000));
  }
  return cache;
}

std::vector<float> random_query(std::size_t dim) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0.0f, 0.3f);
  std::vector<float> q(dim);
  for (auto& x : q) x = n(rng);
  return q;
}

// Per-token scoring cost; expected to grow linearly with capacity.
void BM_Score(benchmark::State& state) {
  const auto capacity = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const NeuralCache cache = filled_cache(capacity, dim, 0.5);
  const auto q = random_query(dim);
  for (auto _ : state) benchmark::DoNotOptimize(cache.score(q));
  state.SetItemsProcessed(state.iterations());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Score)
    ->ArgsProduct({{100, 1000, 2000, 5000, 10000}, {128, 256}})
    ->Complexity(benchmark::oN);

void BM_UnigramScore(benchmark::State& state) {
  const NeuralCache cache = filled_cache(static_cast<std::size_t>(state.range(0)), 8, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(cache.unigram_score());
}
BENCHMARK(BM_UnigramScore)->Arg(1000)->Arg(10000);

void BM_Push(benchmark::State& state) {
  NeuralCache cache = filled_cache(static_cast<std::size_t>(state.range(0)), 256, 0.5);
  const auto key = random_query(256);
  TokenId w = 0;
  for (auto _ : state) cache.push(key, w++ % 5000);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Push)->Arg(1000)->Arg(10000);

void BM_BlendGlobal(benchmark::State& state) {
  const auto capacity = static_cast<std::size_t>(state.range(0));
  const NeuralCache cache = filled_cache(capacity, 256, 0.5);
  const auto q = random_query(256);
  const Eigen::VectorXd logits = Eigen::VectorXd::Random(10000);
  for (auto _ : state) benchmark::DoNotOptimize(ncache::blend_global(logits, cache, q, 0.5, 0.0));
}
BENCHMARK(BM_BlendGlobal)->Arg(1000)->Arg(10000);

void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_query(n);
  const auto b = random_query(n);
  for (auto _ : state) benchmark::DoNotOptimize(ncache::dot_f64(a.data(), b.data(), n));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * n * 2 * sizeof(float)));
}
BENCHMARK(BM_Dot)->Arg(128)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
