#pragma once

#include "ncache/rnn_lm.hpp"

namespace ncache {

double global_norm(const Parameters& grads);

// Rescales every gradient by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm before clipping.
double clip_gradients(Parameters& grads, double max_norm);

struct AdagradState {
  Parameters accumulators;
  double learning_rate = 0.2;
  double epsilon = 1e-10;

  AdagradState(const Parameters& like, double lr, double eps = 1e-10);
};

// accumulator += g^2; param -= lr * g / (sqrt(accumulator) + eps)
void adagrad_update(Parameters& params, const Parameters& grads, AdagradState& state);

}  // namespace ncache
