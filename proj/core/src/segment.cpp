#include "ncache/segment.hpp"

#include <cmath>

#include "ncache/errors.hpp"

namespace ncache {

using Eigen::Index;
using Eigen::MatrixXd;

BatchState BatchState::zeros(const RnnConfig& config, std::size_t lanes) {
  BatchState s;
  s.h = MatrixXd::Zero(config.hidden_dim, static_cast<Index>(lanes));
  if (config.cell == CellKind::lstm) s.c = MatrixXd::Zero(config.hidden_dim, static_cast<Index>(lanes));
  return s;
}

namespace {

// Columns are laid out step-major: column t * lanes + lane.
SegmentResult run_segment(const Segment& segment, const BatchState& initial, const Parameters& params,
                          const RnnConfig& config, std::mt19937_64* rng, bool train,
                          Parameters* grads) {
  const bool lstm = config.cell == CellKind::lstm;
  const Index d = config.hidden_dim;
  const Index lanes = static_cast<Index>(segment.inputs.lanes());
  const Index steps = static_cast<Index>(segment.inputs.steps());
  const Index n = lanes * steps;
  if (initial.h.rows() != d || initial.h.cols() != lanes || (lstm && initial.c.cols() != lanes)) {
    throw std::invalid_argument("forward_backward_segment: state does not match lanes");
  }

  MatrixXd x(d, n);
  for (Index t = 0; t < steps; ++t) {
    for (Index b = 0; b < lanes; ++b) {
      const TokenId id = segment.inputs(static_cast<std::size_t>(b), static_cast<std::size_t>(t));
      if (id < 0 || id >= config.vocab_size) throw std::out_of_range("segment token out of range");
      x.col(t * lanes + b) = params.embedding.col(id);
    }
  }

  // Pre-activations; input contribution for all steps at once.
  MatrixXd pre = lstm ? MatrixXd(params.input_weights * x) : x;
  pre.colwise() += params.bias.col(0);

  MatrixXd h_all(d, n);
  MatrixXd c_all;
  MatrixXd tanh_c;
  if (lstm) {
    c_all.resize(d, n);
    tanh_c.resize(d, n);
  }

  for (Index t = 0; t < steps; ++t) {
    auto block = pre.middleCols(t * lanes, lanes);
    if (t == 0) {
      block.noalias() += params.recurrent * initial.h;
    } else {
      block.noalias() += params.recurrent * h_all.middleCols((t - 1) * lanes, lanes);
    }
    if (lstm) {
      auto ifo = block.topRows(3 * d).array();
      ifo = 1.0 / (1.0 + (-ifo).exp());
      block.bottomRows(d).array() = block.bottomRows(d).array().tanh();
      const auto i = block.topRows(d).array();
      const auto f = block.middleRows(d, d).array();
      const auto o = block.middleRows(2 * d, d).array();
      const auto g = block.bottomRows(d).array();
      auto c = c_all.middleCols(t * lanes, lanes);
      if (t == 0) {
        c.array() = f * initial.c.array() + i * g;
      } else {
        c.array() = f * c_all.middleCols((t - 1) * lanes, lanes).array() + i * g;
      }
      tanh_c.middleCols(t * lanes, lanes).array() = c.array().tanh();
      h_all.middleCols(t * lanes, lanes).array() = o * tanh_c.middleCols(t * lanes, lanes).array();
    } else if (config.activation == Activation::tanh) {
      block.array() = block.array().tanh();
      h_all.middleCols(t * lanes, lanes) = block;
    } else {
      block.array() = 1.0 / (1.0 + (-block.array()).exp());
      h_all.middleCols(t * lanes, lanes) = block;
    }
  }

  SegmentResult result;
  result.token_count = static_cast<std::size_t>(n);
  result.final_state.h = h_all.rightCols(lanes);
  if (lstm) result.final_state.c = c_all.rightCols(lanes);

  // Inverted dropout on the softmax input.
  MatrixXd mask;
  const bool dropout = train && config.dropout_prob > 0.0 && rng != nullptr;
  MatrixXd dropped;
  if (dropout) {
    const double keep = 1.0 - config.dropout_prob;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mask.resize(d, n);
    for (Index k = 0; k < mask.size(); ++k) mask.data()[k] = u(*rng) < keep ? 1.0 / keep : 0.0;
    dropped = h_all.cwiseProduct(mask);
  }
  const MatrixXd& features = dropout ? dropped : h_all;

  MatrixXd logits = params.output * features;
  logits.colwise() += params.output_bias.col(0);

  double loss = 0.0;
  for (Index col = 0; col < n; ++col) {
    const Index t = col / lanes;
    const Index b = col % lanes;
    const TokenId target = segment.targets(static_cast<std::size_t>(b), static_cast<std::size_t>(t));
    if (target < 0 || target >= config.vocab_size) throw std::out_of_range("segment target out of range");
    auto z = logits.col(col);
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    loss += lse - z(target);
    if (grads != nullptr) {
      z.array() = (z.array() - lse).exp();
      z(target) -= 1.0;
    }
  }
  if (!std::isfinite(loss)) throw DivergenceError("non-finite loss in segment");
  result.loss_sum = loss;
  if (grads == nullptr) return result;

  if (!same_shape(*grads, params)) *grads = Parameters::zeros(config);

  const MatrixXd& dlogits = logits;
  grads->output.noalias() = dlogits * features.transpose();
  grads->output_bias = dlogits.rowwise().sum();
  MatrixXd dh_out = params.output.transpose() * dlogits;
  if (dropout) dh_out.array() *= mask.array();

  MatrixXd dpre(config.gate_rows(), n);
  MatrixXd dh_next = MatrixXd::Zero(d, lanes);
  MatrixXd dc_next;
  if (lstm) dc_next = MatrixXd::Zero(d, lanes);

  for (Index t = steps - 1; t >= 0; --t) {
    const Index c0 = t * lanes;
    MatrixXd dh = dh_out.middleCols(c0, lanes) + dh_next;
    auto dblock = dpre.middleCols(c0, lanes);
    if (lstm) {
      const auto gates = pre.middleCols(c0, lanes);
      const auto i = gates.topRows(d).array();
      const auto f = gates.middleRows(d, d).array();
      const auto o = gates.middleRows(2 * d, d).array();
      const auto g = gates.bottomRows(d).array();
      const auto tc = tanh_c.middleCols(c0, lanes).array();
      const MatrixXd& c_prev_src = t == 0 ? initial.c : c_all;
      const auto c_prev = t == 0 ? c_prev_src.leftCols(lanes).array()
                                 : c_prev_src.middleCols(c0 - lanes, lanes).array();
      MatrixXd dc = (dh.array() * o * (1.0 - tc.square())).matrix() + dc_next;
      dblock.topRows(d).array() = dc.array() * g * i * (1.0 - i);
      dblock.middleRows(d, d).array() = dc.array() * c_prev * f * (1.0 - f);
      dblock.middleRows(2 * d, d).array() = dh.array() * tc * o * (1.0 - o);
      dblock.bottomRows(d).array() = dc.array() * i * (1.0 - g.square());
      dc_next = dc.cwiseProduct(gates.middleRows(d, d));
    } else {
      const auto h = h_all.middleCols(c0, lanes).array();
      if (config.activation == Activation::tanh) {
        dblock.array() = dh.array() * (1.0 - h.square());
      } else {
        dblock.array() = dh.array() * h * (1.0 - h);
      }
    }
    dh_next.noalias() = params.recurrent.transpose() * dblock;
  }

  MatrixXd h_prev(d, n);
  h_prev.leftCols(lanes) = initial.h;
  if (n > lanes) h_prev.rightCols(n - lanes) = h_all.leftCols(n - lanes);
  grads->recurrent.noalias() = dpre * h_prev.transpose();
  grads->bias = dpre.rowwise().sum();

  MatrixXd dx;
  if (lstm) {
    grads->input_weights.noalias() = dpre * x.transpose();
    dx.noalias() = params.input_weights.transpose() * dpre;
  } else {
    dx = std::move(dpre);
  }
  grads->embedding.setZero();
  for (Index t = 0; t < steps; ++t) {
    for (Index b = 0; b < lanes; ++b) {
      const TokenId id = segment.inputs(static_cast<std::size_t>(b), static_cast<std::size_t>(t));
      grads->embedding.col(id) += dx.col(t * lanes + b);
    }
  }
  return result;
}

}  // namespace

SegmentResult forward_backward_segment(const Segment& segment, const BatchState& initial,
                                       const Parameters& params, const RnnConfig& config,
                                       std::mt19937_64& rng, bool train, Parameters& grads) {
  return run_segment(segment, initial, params, config, &rng, train, &grads);
}

SegmentResult forward_segment(const Segment& segment, const BatchState& initial,
                              const Parameters& params, const RnnConfig& config) {
  return run_segment(segment, initial, params, config, nullptr, false, nullptr);
}

}  // namespace ncache
