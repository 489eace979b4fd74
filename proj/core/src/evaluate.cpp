#include "ncache/evaluate.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ncache/errors.hpp"
#include "ncache/neural_cache.hpp"
#include "ncache/softmax.hpp"

namespace ncache {

void check_compatible(const LanguageModel& model, const TokenStream& stream) {
  if (model.vocab_hash != 0 && stream.vocab_hash != 0 && model.vocab_hash != stream.vocab_hash) {
    throw VocabularyMismatch("stream '" + stream.source_name +
                             "' was encoded with a different vocabulary than the model");
  }
  for (TokenId id : stream.ids) {
    if (id < 0 || id >= model.config.vocab_size) {
      throw VocabularyMismatch("token id " + std::to_string(id) + " outside model vocabulary of size " +
                               std::to_string(model.config.vocab_size));
    }
  }
}

EvalReport evaluate(const LanguageModel& model, const TokenStream& stream, const BlendConfig& blend,
                    const EvalOptions& options) {
  blend.validate();
  model.config.validate();
  check_compatible(model, stream);
  if (stream.size() < 2) throw std::invalid_argument("evaluate: stream needs at least two tokens");

  const auto d = static_cast<std::size_t>(model.config.hidden_dim);
  NeuralCache cache(blend.cache_capacity, d, blend.theta);
  HiddenState state = HiddenState::zeros(model.config);
  std::vector<float> query(d);

  EvalReport report;
  if (options.keep_per_token) report.per_token_nll.reserve(stream.size() - 1);
  for (std::size_t t = 0; t + 1 < stream.size(); ++t) {
    const TokenId x = stream.ids[t];
    const TokenId target = stream.ids[t + 1];
    if (blend.reset_on_eos && x == stream.eos_id) cache.clear();

    state = rnn_step(x, state, model.params, model.config);
    for (std::size_t i = 0; i < d; ++i) query[i] = static_cast<float>(state.h(static_cast<Eigen::Index>(i)));
    const Eigen::VectorXd logits = vocab_logits(state.h, model.params);

    double p;
    if (blend.mode == BlendMode::linear) {
      const Eigen::VectorXd p_vocab = log_softmax(logits).array().exp();
      const SparseDistribution p_cache = cache.score(std::span<const float>(query));
      p = blend_linear(p_vocab, p_cache, blend.lambda)(target);
    } else {
      p = blend_global(logits, cache, query, blend.theta, blend.alpha)(target);
    }
    const double nll = -std::log(p);
    report.total_nll += nll;
    if (options.keep_per_token) report.per_token_nll.push_back(nll);

    // Scored before stored: position t+1 never sees its own entry.
    cache.push(std::span<const float>(query), target);
  }
  report.token_count = stream.size() - 1;
  report.perplexity = std::exp(report.total_nll / static_cast<double>(report.token_count));
  return report;
}

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  const auto old = out.precision(12);
  out << "tokens\tnll\tppl\n" << report.token_count << '\t' << report.total_nll << '\t' << report.perplexity
      << '\n';
  out.precision(old);
}

void write_per_token_tsv(std::ostream& out, const EvalReport& report) {
  const auto old = out.precision(12);
  out << "position\tnll\n";
  for (std::size_t i = 0; i < report.per_token_nll.size(); ++i) out << i + 1 << '\t' << report.per_token_nll[i] << '\n';
  out.precision(old);
}

}  // namespace ncache
