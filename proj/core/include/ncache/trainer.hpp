#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ncache/corpus.hpp"
#include "ncache/rnn_lm.hpp"

namespace ncache {

struct TrainOptions {
  std::size_t lanes = 20;
  std::size_t unroll = 30;
  int epochs = 5;
  double learning_rate = 0.2;
  double clip_norm = 0.1;
  double epsilon = 1e-10;
  // Skip the next epoch when it would overrun this wall-clock budget; <= 0 disables.
  double time_budget_seconds = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double train_ppl = 0.0;
  double valid_ppl = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Parameters params;  // best validation checkpoint (initial params when no epoch ran)
  std::vector<EpochLog> log;
  int best_epoch = 0;  // 0 means the initialization
  bool diverged = false;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Adagrad + clipped truncated BPTT. Hidden state carries across segments
// within a lane and is reset at each epoch boundary.
TrainResult train(const TokenStream& train_stream, const TokenStream& valid_stream,
                  const RnnConfig& config, const TrainOptions& options,
                  const EpochCallback& on_epoch = {});

// Cache-free sequential perplexity of a single lane over the stream.
double stream_perplexity(const Parameters& params, const RnnConfig& config,
                         const TokenStream& stream);

// `epoch<TAB>train_ppl<TAB>valid_ppl` rows.
void write_train_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace ncache
