#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ncache/blend.hpp"
#include "ncache/corpus.hpp"
#include "ncache/rnn_lm.hpp"

namespace ncache {

struct SweepSpec {
  std::vector<double> theta_grid;
  std::vector<double> mix_grid;  // lambda (linear) or alpha (global)
  std::vector<std::size_t> capacity_grid;
  BlendMode mode = BlendMode::linear;
  bool reset_on_eos = false;

  void validate() const;
  static SweepSpec defaults(BlendMode mode);
};

struct SweepRow {
  double theta = 0.0;
  double mix = 0.0;
  std::size_t capacity = 0;
  double perplexity = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // capacity-major, then theta, then mix
  SweepRow best;
  double base_perplexity = 0.0;
};

// Everything the blend needs from one forward pass over a stream: the query
// hidden state at each position and the vocabulary statistics of its
// target. Independent of every cache hyperparameter.
struct HiddenTrace {
  std::size_t dim = 0;
  std::vector<float> queries;  // positions x dim; also the cache keys
  std::vector<TokenId> targets;
  std::vector<TokenId> inputs;
  std::vector<double> target_logit;
  std::vector<double> log_normalizer;  // log-sum-exp of the vocabulary logits
  TokenId eos_id = -1;

  std::size_t positions() const { return targets.size(); }
  const float* query(std::size_t t) const { return queries.data() + t * dim; }
  double base_perplexity() const;
};

HiddenTrace trace_stream(const LanguageModel& model, const TokenStream& stream);

// Perplexity of every (capacity, theta, mix) cell, re-blending one shared
// trace. Matches evaluate() cell by cell.
SweepResult sweep(const HiddenTrace& trace, const SweepSpec& spec);
SweepResult sweep(const LanguageModel& model, const TokenStream& valid, const SweepSpec& spec);

// Row ordering used to pick the best cell: lower perplexity, then smaller
// mix, smaller theta, smaller capacity.
bool better_row(const SweepRow& a, const SweepRow& b);

// Count-based unigram cache perplexities for each (capacity, mix) cell,
// computed from window counts rather than from the neural path.
SweepResult unigram_sweep(const HiddenTrace& trace, const std::vector<std::size_t>& capacities,
                          const std::vector<double>& mix_grid, BlendMode mode,
                          bool reset_on_eos = false);

struct CurvePoint {
  std::size_t capacity = 0;
  double neural_perplexity = 0.0;
  double neural_theta = 0.0;
  double neural_mix = 0.0;
  double unigram_perplexity = 0.0;
  double unigram_mix = 0.0;
};

// For each size, tunes (theta, mix) on `valid`, then scores `eval` with the
// tuned values; the unigram baseline tunes mix only with theta fixed at 0.
std::vector<CurvePoint> cache_size_curve(const HiddenTrace& valid, const HiddenTrace& eval,
                                         const SweepSpec& spec);
std::vector<CurvePoint> cache_size_curve(const LanguageModel& model, const TokenStream& valid,
                                         const TokenStream& eval, const SweepSpec& spec);

// `theta<TAB>mix<TAB>capacity<TAB>ppl`
void write_sweep_tsv(std::ostream& out, const SweepResult& result);
void write_curve_tsv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace ncache
