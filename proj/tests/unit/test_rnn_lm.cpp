#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "ncache/errors.hpp"
#include "ncache/rnn_lm.hpp"
#include "ncache/softmax.hpp"
#include "support/oracles.hpp"

namespace ncache {
namespace {

using testing::sigmoid;

RnnConfig small(CellKind cell, int d = 3, int v = 5) {
  RnnConfig c;
  c.cell = cell;
  c.hidden_dim = d;
  c.vocab_size = v;
  return c;
}

TEST(RnnConfig, ValidateRejectsBadValues) {
  RnnConfig c = small(CellKind::lstm);
  EXPECT_NO_THROW(c.validate());
  c.hidden_dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small(CellKind::lstm);
  c.dropout_prob = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small(CellKind::lstm);
  c.vocab_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RnnConfig, ParsesNames) {
  EXPECT_EQ(parse_cell_kind("lstm"), CellKind::lstm);
  EXPECT_EQ(parse_cell_kind("elman"), CellKind::elman);
  EXPECT_EQ(parse_activation("logistic"), Activation::logistic);
  EXPECT_EQ(parse_activation("tanh"), Activation::tanh);
  EXPECT_THROW(parse_cell_kind("gru"), ConfigError);
  EXPECT_EQ(to_string(CellKind::lstm), "lstm");
}

TEST(InitParams, ShapesAndForgetBias) {
  const RnnConfig c = small(CellKind::lstm, 4, 7);
  const Parameters p = init_params(c);
  EXPECT_EQ(p.embedding.rows(), 4);
  EXPECT_EQ(p.embedding.cols(), 7);
  EXPECT_EQ(p.input_weights.rows(), 16);
  EXPECT_EQ(p.recurrent.rows(), 16);
  EXPECT_EQ(p.output.rows(), 7);
  for (int r = 0; r < 16; ++r) EXPECT_DOUBLE_EQ(p.bias(r, 0), (r >= 4 && r < 8) ? 1.0 : 0.0);
  EXPECT_LE(p.embedding.cwiseAbs().maxCoeff(), c.init_range);
  EXPECT_GT(p.embedding.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InitParams, DeterministicInSeed) {
  RnnConfig c = small(CellKind::elman, 4, 7);
  const Parameters a = init_params(c);
  const Parameters b = init_params(c);
  EXPECT_EQ(a.recurrent, b.recurrent);
  c.seed = 2;
  EXPECT_NE(init_params(c).recurrent, a.recurrent);
  EXPECT_EQ(init_params(c).input_weights.size(), 0);
}

TEST(ElmanStep, MatchesHandComputation) {
  RnnConfig c = small(CellKind::elman, 2, 3);
  Parameters p = Parameters::zeros(c);
  p.embedding << 0.1, 0.2, 0.3,
                 -0.4, 0.5, 0.6;
  p.recurrent << 0.5, -1.0,
                 2.0, 0.25;
  p.bias << 0.05, -0.05;
  HiddenState prev;
  prev.h = Eigen::Vector2d(0.3, -0.2);
  const HiddenState next = elman_step(1, prev, p, c);
  EXPECT_NEAR(next.h(0), std::tanh(0.2 + 0.5 * 0.3 + 1.0 * 0.2 + 0.05), 1e-15);
  EXPECT_NEAR(next.h(1), std::tanh(0.5 + 2.0 * 0.3 - 0.25 * 0.2 - 0.05), 1e-15);

  c.activation = Activation::logistic;
  const HiddenState lg = elman_step(1, prev, p, c);
  EXPECT_NEAR(lg.h(0), sigmoid(0.2 + 0.5 * 0.3 + 1.0 * 0.2 + 0.05), 1e-15);
}

TEST(LstmStep, ZeroWeightsGiveKnownState) {
  // All pre-activations zero: gates are 1/2, candidate 0, so c = c0/2.
  const RnnConfig c = small(CellKind::lstm, 3, 4);
  Parameters p = Parameters::zeros(c);
  HiddenState prev = HiddenState::zeros(c);
  prev.c = Eigen::Vector3d(1.0, -2.0, 0.5);
  const HiddenState next = lstm_step(2, prev, p, c);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(next.c(k), prev.c(k) / 2, 1e-15);
    EXPECT_NEAR(next.h(k), 0.5 * std::tanh(prev.c(k) / 2), 1e-15);
  }
}

TEST(LstmStep, GateOrderInputForgetOutputCandidate) {
  const RnnConfig c = small(CellKind::lstm, 1, 2);
  Parameters p = Parameters::zeros(c);
  p.bias << 0.3, -0.7, 1.1, 0.4;
  HiddenState prev = HiddenState::zeros(c);
  prev.c(0) = 0.9;
  const HiddenState next = lstm_step(0, prev, p, c);
  const double cell = sigmoid(-0.7) * 0.9 + sigmoid(0.3) * std::tanh(0.4);
  EXPECT_NEAR(next.c(0), cell, 1e-15);
  EXPECT_NEAR(next.h(0), sigmoid(1.1) * std::tanh(cell), 1e-15);
}

TEST(Step, RejectsOutOfRangeToken) {
  const RnnConfig c = small(CellKind::lstm);
  const Parameters p = init_params(c);
  EXPECT_THROW(rnn_step(5, HiddenState::zeros(c), p, c), std::out_of_range);
  EXPECT_THROW(rnn_step(-1, HiddenState::zeros(c), p, c), std::out_of_range);
}

TEST(VocabLogProbs, MatchesBruteSoftmax) {
  const RnnConfig c = small(CellKind::lstm, 3, 6);
  Parameters p = init_params(c);
  p.output_bias.setRandom();
  const Eigen::VectorXd h = Eigen::Vector3d(0.2, -0.5, 0.9);
  const Eigen::VectorXd lp = vocab_log_probs(h, p);
  const Eigen::VectorXd z = vocab_logits(h, p);
  const auto ref = testing::brute_softmax(std::vector<double>(z.data(), z.data() + z.size()));
  double total = 0;
  for (int w = 0; w < 6; ++w) {
    EXPECT_NEAR(std::exp(lp(w)), ref[w], 1e-14);
    total += std::exp(lp(w));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(nll_loss(lp, 2), -std::log(ref[2]), 1e-12);
}

TEST(Softmax, StableForLargeLogits) {
  Eigen::VectorXd z(3);
  z << 1000.0, 1000.0, -1000.0;
  const Eigen::VectorXd p = softmax(z);
  EXPECT_NEAR(p(0), 0.5, 1e-15);
  EXPECT_NEAR(p(2), 0.0, 1e-15);
  EXPECT_NEAR(log_sum_exp(z), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_add_exp(-1000.0, -1000.0), -1000.0 + std::log(2.0), 1e-12);
}

}  // namespace
}  // namespace ncache
