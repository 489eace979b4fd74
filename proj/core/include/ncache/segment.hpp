#pragma once

#include <cstddef>
#include <random>

#include <Eigen/Dense>

#include "ncache/corpus.hpp"
#include "ncache/rnn_lm.hpp"

namespace ncache {

// Recurrent state for a batch of lanes, one column per lane.
struct BatchState {
  Eigen::MatrixXd h;
  Eigen::MatrixXd c;  // empty for Elman

  static BatchState zeros(const RnnConfig& config, std::size_t lanes);
};

struct SegmentResult {
  double loss_sum = 0.0;  // summed NLL over lanes x steps, natural log
  std::size_t token_count = 0;
  BatchState final_state;
};

// Truncated BPTT over one segment. `grads` is overwritten with the gradient
// of the summed NLL; the incoming state is treated as a constant. When
// `train` is set and dropout_prob > 0, inverted dropout is applied to h_t
// just before the output layer using masks drawn from `rng`.
//
// Throws DivergenceError if the loss is not finite.
SegmentResult forward_backward_segment(const Segment& segment, const BatchState& initial,
                                       const Parameters& params, const RnnConfig& config,
                                       std::mt19937_64& rng, bool train, Parameters& grads);

// Forward pass only; no dropout.
SegmentResult forward_segment(const Segment& segment, const BatchState& initial,
                              const Parameters& params, const RnnConfig& config);

}  // namespace ncache
