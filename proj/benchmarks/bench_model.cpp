#include <random>

#include <benchmark/benchmark.h>

#include "ncache/rnn_lm.hpp"
#include "ncache/segment.hpp"

namespace {

using namespace ncache;

RnnConfig config_for(benchmark::State& state) {
  RnnConfig c;
  c.cell = state.range(0) == 0 ? CellKind::lstm : CellKind::elman;
  c.hidden_dim = static_cast<int>(state.range(1));
  c.vocab_size = static_cast<int>(state.range(2));
  return c;
}

void BM_SingleStep(benchmark::State& state) {
  const RnnConfig c = config_for(state);
  const Parameters p = init_params(c);
  HiddenState h = HiddenState::zeros(c);
  TokenId x = 0;
  for (auto _ : state) {
    h = rnn_step(x, h, p, c);
    benchmark::DoNotOptimize(vocab_log_probs(h.h, p));
    x = (x + 7) % c.vocab_size;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SingleStep)->Args({0, 128, 10000})->Args({1, 128, 10000})->Args({0, 256, 10000});

// One truncated-BPTT segment (forward + backward), 20 lanes x 30 steps.
void BM_TrainSegment(benchmark::State& state) {
  const RnnConfig c = config_for(state);
  const Parameters p = init_params(c);
  std::mt19937_64 rng(3);
  Segment seg{TokenBlock(20, 30), TokenBlock(20, 30)};
  for (std::size_t b = 0; b < 20; ++b) {
    for (std::size_t t = 0; t < 30; ++t) {
      seg.inputs(b, t) = static_cast<TokenId>(rng() % c.vocab_size);
      seg.targets(b, t) = static_cast<TokenId>(rng() % c.vocab_size);
    }
  }
  const BatchState init = BatchState::zeros(c, 20);
  Parameters grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_backward_segment(seg, init, p, c, rng, true, grads).loss_sum);
  }
  state.SetItemsProcessed(state.iterations() * 600);
}
BENCHMARK(BM_TrainSegment)->Args({0, 128, 1400})->Args({0, 128, 10000})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
