#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "ncache/vocabulary.hpp"

namespace ncache {

enum class CellKind : std::uint32_t { elman = 0, lstm = 1 };
enum class Activation : std::uint32_t { logistic = 0, tanh = 1 };

std::string_view to_string(CellKind kind);
std::string_view to_string(Activation activation);
CellKind parse_cell_kind(std::string_view text);
Activation parse_activation(std::string_view text);

struct RnnConfig {
  CellKind cell = CellKind::lstm;
  int hidden_dim = 128;
  int vocab_size = 2;
  double dropout_prob = 0.0;
  Activation activation = Activation::tanh;  // Elman only
  double init_range = 0.05;
  std::uint64_t seed = 1;

  // Throws ConfigError on out-of-range fields.
  void validate() const;

  int gate_rows() const { return cell == CellKind::lstm ? 4 * hidden_dim : hidden_dim; }

  friend bool operator==(const RnnConfig&, const RnnConfig&) = default;
};

// All trainable weights. The same type doubles as a gradient container.
//
// LSTM gate rows are stacked in the order input, forget, output, candidate.
struct Parameters {
  Eigen::MatrixXd embedding;      // d x V; column w is the input embedding of w
  Eigen::MatrixXd input_weights;  // 4d x d for LSTM, empty for Elman
  Eigen::MatrixXd recurrent;      // d x d (Elman) or 4d x d (LSTM)
  Eigen::MatrixXd bias;           // d x 1 or 4d x 1
  Eigen::MatrixXd output;         // V x d; row w is o_w
  Eigen::MatrixXd output_bias;    // V x 1

  // Zero-filled parameters shaped for `config`.
  static Parameters zeros(const RnnConfig& config);

  void set_zero();
  std::size_t parameter_count() const;

  template <class Fn>
  void for_each(Fn&& fn) {
    fn(std::string_view("embedding"), embedding);
    fn(std::string_view("input_weights"), input_weights);
    fn(std::string_view("recurrent"), recurrent);
    fn(std::string_view("bias"), bias);
    fn(std::string_view("output"), output);
    fn(std::string_view("output_bias"), output_bias);
  }
  template <class Fn>
  void for_each(Fn&& fn) const {
    fn(std::string_view("embedding"), embedding);
    fn(std::string_view("input_weights"), input_weights);
    fn(std::string_view("recurrent"), recurrent);
    fn(std::string_view("bias"), bias);
    fn(std::string_view("output"), output);
    fn(std::string_view("output_bias"), output_bias);
  }

  bool all_finite() const;
};

bool same_shape(const Parameters& a, const Parameters& b);

struct HiddenState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;  // LSTM memory cell; empty for Elman

  static HiddenState zeros(const RnnConfig& config);
};

// Weights i.i.d. uniform on [-init_range, init_range] from `config.seed`;
// biases zero except the LSTM forget gate, which starts at 1.
Parameters init_params(const RnnConfig& config);

HiddenState elman_step(TokenId x, const HiddenState& prev, const Parameters& params,
                       const RnnConfig& config);
HiddenState lstm_step(TokenId x, const HiddenState& prev, const Parameters& params,
                      const RnnConfig& config);
// Dispatches on config.cell.
HiddenState rnn_step(TokenId x, const HiddenState& prev, const Parameters& params,
                     const RnnConfig& config);

// output * h + output_bias
Eigen::VectorXd vocab_logits(const Eigen::VectorXd& h, const Parameters& params);
Eigen::VectorXd vocab_log_probs(const Eigen::VectorXd& h, const Parameters& params);

inline double nll_loss(const Eigen::VectorXd& log_probs, TokenId target) {
  return -log_probs(target);
}

// Frozen model handle used by evaluation and tuning.
struct LanguageModel {
  RnnConfig config;
  Parameters params;
  std::uint64_t vocab_hash = 0;
};

}  // namespace ncache
