#include "ncache/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "ncache/errors.hpp"
#include "ncache/optim.hpp"
#include "ncache/segment.hpp"

namespace ncache {

double stream_perplexity(const Parameters& params, const RnnConfig& config, const TokenStream& stream) {
  if (stream.size() < 2) throw std::invalid_argument("perplexity needs at least two tokens");
  HiddenState state = HiddenState::zeros(config);
  double nll = 0.0;
  for (std::size_t t = 0; t + 1 < stream.size(); ++t) {
    state = rnn_step(stream.ids[t], state, params, config);
    nll += nll_loss(vocab_log_probs(state.h, params), stream.ids[t + 1]);
  }
  return std::exp(nll / static_cast<double>(stream.size() - 1));
}

TrainResult train(const TokenStream& train_stream, const TokenStream& valid_stream,
                  const RnnConfig& config, const TrainOptions& options, const EpochCallback& on_epoch) {
  config.validate();
  if (options.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(options.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(options.clip_norm > 0.0)) throw ConfigError("clip norm must be positive");

  TrainResult result;
  Parameters params = init_params(config);
  result.params = params;
  if (options.epochs == 0) return result;

  const BatchedSequence batches = make_batches(train_stream, options.lanes, options.unroll);
  // Dropout masks draw from a generator derived from the model seed.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  Parameters grads = Parameters::zeros(config);
  AdagradState adagrad(params, options.learning_rate, options.epsilon);

  double best_valid = std::numeric_limits<double>::infinity();
  const auto start = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    BatchState state = BatchState::zeros(config, options.lanes);
    double loss = 0.0;
    std::size_t tokens = 0;
    try {
      for (const auto& segment : batches.segments) {
        SegmentResult r = forward_backward_segment(segment, state, params, config, rng, true, grads);
        clip_gradients(grads, options.clip_norm);
        adagrad_update(params, grads, adagrad);
        if (!params.all_finite()) throw DivergenceError("non-finite parameters after update");
        loss += r.loss_sum;
        tokens += r.token_count;
        state = std::move(r.final_state);
      }
    } catch (const DivergenceError&) {
      result.diverged = true;
      return result;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_ppl = std::exp(loss / static_cast<double>(tokens));
    entry.valid_ppl = stream_perplexity(params, config, valid_stream);
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    if (!std::isfinite(entry.valid_ppl)) {
      result.diverged = true;
      return result;
    }
    result.log.push_back(entry);
    if (entry.valid_ppl < best_valid) {
      best_valid = entry.valid_ppl;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(entry);

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.time_budget_seconds > 0.0 && elapsed + entry.seconds > options.time_budget_seconds) break;
  }
  return result;
}

void write_train_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch\ttrain_ppl\tvalid_ppl\n";
  out.precision(10);
  for (const auto& e : log) out << e.epoch << '\t' << e.train_ppl << '\t' << e.valid_ppl << '\n';
}

}  // namespace ncache
