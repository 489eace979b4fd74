#include "ncache/optim.hpp"

#include <cmath>

namespace ncache {

double global_norm(const Parameters& grads) {
  double sq = 0.0;
  grads.for_each([&](std::string_view, const Eigen::MatrixXd& g) { sq += g.squaredNorm(); });
  return std::sqrt(sq);
}

double clip_gradients(Parameters& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    grads.for_each([&](std::string_view, Eigen::MatrixXd& g) { g *= scale; });
  }
  return norm;
}

AdagradState::AdagradState(const Parameters& like, double lr, double eps)
    : accumulators(like), learning_rate(lr), epsilon(eps) {
  accumulators.set_zero();
}

void adagrad_update(Parameters& params, const Parameters& grads, AdagradState& state) {
  const double lr = state.learning_rate;
  const double eps = state.epsilon;
  auto update = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g, Eigen::MatrixXd& acc) {
    acc.array() += g.array().square();
    p.array() -= lr * g.array() / (acc.array().sqrt() + eps);
  };
  update(params.embedding, grads.embedding, state.accumulators.embedding);
  update(params.input_weights, grads.input_weights, state.accumulators.input_weights);
  update(params.recurrent, grads.recurrent, state.accumulators.recurrent);
  update(params.bias, grads.bias, state.accumulators.bias);
  update(params.output, grads.output, state.accumulators.output);
  update(params.output_bias, grads.output_bias, state.accumulators.output_bias);
}

}  // namespace ncache
