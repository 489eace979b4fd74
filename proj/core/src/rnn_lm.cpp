#include "ncache/rnn_lm.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ncache/errors.hpp"
#include "ncache/softmax.hpp"

namespace ncache {

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "elman"; }

std::string_view to_string(Activation activation) {
  return activation == Activation::tanh ? "tanh" : "logistic";
}

CellKind parse_cell_kind(std::string_view text) {
  if (text == "lstm") return CellKind::lstm;
  if (text == "elman") return CellKind::elman;
  throw ConfigError("unknown cell kind '" + std::string(text) + "' (expected lstm|elman)");
}

Activation parse_activation(std::string_view text) {
  if (text == "tanh") return Activation::tanh;
  if (text == "logistic" || text == "sigmoid") return Activation::logistic;
  throw ConfigError("unknown activation '" + std::string(text) + "' (expected tanh|logistic)");
}

void RnnConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(init_range >= 0.0) || !std::isfinite(init_range)) throw ConfigError("init_range must be >= 0");
}

Parameters Parameters::zeros(const RnnConfig& config) {
  const Eigen::Index d = config.hidden_dim;
  const Eigen::Index v = config.vocab_size;
  const Eigen::Index g = config.gate_rows();
  Parameters p;
  p.embedding = Eigen::MatrixXd::Zero(d, v);
  p.input_weights = config.cell == CellKind::lstm ? Eigen::MatrixXd::Zero(g, d) : Eigen::MatrixXd();
  p.recurrent = Eigen::MatrixXd::Zero(g, d);
  p.bias = Eigen::MatrixXd::Zero(g, 1);
  p.output = Eigen::MatrixXd::Zero(v, d);
  p.output_bias = Eigen::MatrixXd::Zero(v, 1);
  return p;
}

void Parameters::set_zero() {
  for_each([](std::string_view, Eigen::MatrixXd& m) { m.setZero(); });
}

std::size_t Parameters::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool Parameters::all_finite() const {
  bool ok = true;
  for_each([&](std::string_view, const Eigen::MatrixXd& m) { ok = ok && m.allFinite(); });
  return ok;
}

bool same_shape(const Parameters& a, const Parameters& b) {
  auto eq = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols();
  };
  return eq(a.embedding, b.embedding) && eq(a.input_weights, b.input_weights) &&
         eq(a.recurrent, b.recurrent) && eq(a.bias, b.bias) && eq(a.output, b.output) &&
         eq(a.output_bias, b.output_bias);
}

HiddenState HiddenState::zeros(const RnnConfig& config) {
  HiddenState s;
  s.h = Eigen::VectorXd::Zero(config.hidden_dim);
  if (config.cell == CellKind::lstm) s.c = Eigen::VectorXd::Zero(config.hidden_dim);
  return s;
}

Parameters init_params(const RnnConfig& config) {
  config.validate();
  Parameters p = Parameters::zeros(config);
  if (config.init_range > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uniform(-config.init_range, config.init_range);
    auto fill = [&](Eigen::MatrixXd& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng);
    };
    fill(p.embedding);
    fill(p.input_weights);
    fill(p.recurrent);
    fill(p.output);
  }
  if (config.cell == CellKind::lstm) {
    p.bias.middleRows(config.hidden_dim, config.hidden_dim).setOnes();
  }
  return p;
}

namespace {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_token(TokenId x, const RnnConfig& config) {
  if (x < 0 || x >= config.vocab_size) throw std::out_of_range("token id out of range");
}

}  // namespace

HiddenState elman_step(TokenId x, const HiddenState& prev, const Parameters& params,
                       const RnnConfig& config) {
  check_token(x, config);
  Eigen::VectorXd pre = params.embedding.col(x) + params.recurrent * prev.h + params.bias.col(0);
  HiddenState next;
  if (config.activation == Activation::tanh) {
    next.h = pre.array().tanh();
  } else {
    next.h = pre.unaryExpr([](double v) { return logistic(v); });
  }
  return next;
}

HiddenState lstm_step(TokenId x, const HiddenState& prev, const Parameters& params,
                      const RnnConfig& config) {
  check_token(x, config);
  const Eigen::Index d = config.hidden_dim;
  Eigen::VectorXd gates =
      params.input_weights * params.embedding.col(x) + params.recurrent * prev.h + params.bias.col(0);
  auto sig = [](double v) { return logistic(v); };
  const Eigen::VectorXd i = gates.segment(0, d).unaryExpr(sig);
  const Eigen::VectorXd f = gates.segment(d, d).unaryExpr(sig);
  const Eigen::VectorXd o = gates.segment(2 * d, d).unaryExpr(sig);
  const Eigen::VectorXd g = gates.segment(3 * d, d).array().tanh();
  HiddenState next;
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(g);
  next.h = o.array() * next.c.array().tanh();
  return next;
}

HiddenState rnn_step(TokenId x, const HiddenState& prev, const Parameters& params,
                     const RnnConfig& config) {
  return config.cell == CellKind::lstm ? lstm_step(x, prev, params, config)
                                       : elman_step(x, prev, params, config);
}

Eigen::VectorXd vocab_logits(const Eigen::VectorXd& h, const Parameters& params) {
  return params.output * h + params.output_bias.col(0);
}

Eigen::VectorXd vocab_log_probs(const Eigen::VectorXd& h, const Parameters& params) {
  return log_softmax(vocab_logits(h, params));
}

}  // namespace ncache
