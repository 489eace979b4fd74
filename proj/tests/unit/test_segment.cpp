#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ncache/errors.hpp"
#include "ncache/segment.hpp"
#include "support/oracles.hpp"

namespace ncache {
namespace {

using testing::compare_with_finite_differences;
using testing::random_segment;
using testing::random_state;

RnnConfig config_for(CellKind cell, int d, int v, Activation act = Activation::tanh) {
  RnnConfig c;
  c.cell = cell;
  c.hidden_dim = d;
  c.vocab_size = v;
  c.activation = act;
  c.init_range = 0.5;
  return c;
}

struct Case {
  CellKind cell;
  Activation act;
};

class SegmentGradient : public ::testing::TestWithParam<Case> {};

TEST_P(SegmentGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    RnnConfig c = config_for(GetParam().cell, 2 + trial * 2, 5 + trial * 3, GetParam().act);
    c.seed = 100 + trial;
    const Parameters p = init_params(c);
    const std::size_t lanes = 1 + trial;
    const Segment seg = random_segment(rng, lanes, 2 + trial, c.vocab_size);
    const BatchState init = random_state(rng, c, lanes);
    Parameters grads;
    std::mt19937_64 unused(0);
    forward_backward_segment(seg, init, p, c, unused, false, grads);
    auto loss = [&](const Parameters& q) { return forward_segment(seg, init, q, c).loss_sum; };
    const auto report = compare_with_finite_differences(p, grads, loss, 1e-5, 1e-5, 1e-8);
    EXPECT_EQ(report.failures, 0u) << "worst relative error " << report.worst_relative << " over "
                                   << report.checked << " entries";
  }
}

TEST_P(SegmentGradient, SingleStepMatchesHandDerivation) {
  std::mt19937_64 rng(5);
  const RnnConfig c = config_for(GetParam().cell, 4, 7, GetParam().act);
  const Parameters p = init_params(c);
  const Segment seg = random_segment(rng, 3, 1, c.vocab_size);
  const BatchState init = random_state(rng, c, 3);
  Parameters grads;
  std::mt19937_64 unused(0);
  forward_backward_segment(seg, init, p, c, unused, false, grads);
  const Parameters ref = testing::single_step_gradients(seg, init, p, c);
  grads.for_each([&](std::string_view name, const Eigen::MatrixXd& g) {
    ref.for_each([&](std::string_view rname, const Eigen::MatrixXd& r) {
      if (name == rname) {
        ASSERT_EQ(g.rows(), r.rows()) << name;
        if (g.size() > 0) {
          EXPECT_LE((g - r).cwiseAbs().maxCoeff(), 1e-12) << name;
        }
      }
    });
  });
}

TEST_P(SegmentGradient, LossAndStateMatchSequentialSteps) {
  std::mt19937_64 rng(9);
  const RnnConfig c = config_for(GetParam().cell, 5, 9, GetParam().act);
  const Parameters p = init_params(c);
  const Segment seg = random_segment(rng, 4, 6, c.vocab_size);
  const BatchState init = random_state(rng, c, 4);
  const SegmentResult r = forward_segment(seg, init, p, c);
  EXPECT_NEAR(r.loss_sum, testing::sequential_segment_loss(seg, init, p, c), 1e-10);
  EXPECT_EQ(r.token_count, 24u);

  for (std::size_t lane = 0; lane < 4; ++lane) {
    HiddenState s;
    s.h = init.h.col(static_cast<Eigen::Index>(lane));
    if (c.cell == CellKind::lstm) s.c = init.c.col(static_cast<Eigen::Index>(lane));
    for (std::size_t t = 0; t < 6; ++t) s = rnn_step(seg.inputs(lane, t), s, p, c);
    EXPECT_LE((r.final_state.h.col(static_cast<Eigen::Index>(lane)) - s.h).cwiseAbs().maxCoeff(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Cells, SegmentGradient,
                         ::testing::Values(Case{CellKind::lstm, Activation::tanh},
                                           Case{CellKind::elman, Activation::tanh},
                                           Case{CellKind::elman, Activation::logistic}),
                         [](const auto& info) {
                           return std::string(to_string(info.param.cell)) + "_" +
                                  std::string(to_string(info.param.act));
                         });

TEST(Segment, ZeroWeightsAndBalancedTargetsGiveZeroGradient) {
  for (CellKind cell : {CellKind::lstm, CellKind::elman}) {
    RnnConfig c = config_for(cell, 3, 2);
    const Parameters p = Parameters::zeros(c);
    Segment seg{TokenBlock(2, 1), TokenBlock(2, 1)};
    seg.inputs(0, 0) = 0;
    seg.inputs(1, 0) = 0;
    seg.targets(0, 0) = 0;
    seg.targets(1, 0) = 1;
    Parameters grads;
    std::mt19937_64 unused(0);
    const auto r = forward_backward_segment(seg, BatchState::zeros(c, 2), p, c, unused, true, grads);
    EXPECT_NEAR(r.loss_sum, 2 * std::log(2.0), 1e-15);
    grads.for_each([&](std::string_view name, const Eigen::MatrixXd& g) {
      if (g.size() > 0) {
        EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0) << name;
      }
    });
  }
}

TEST(Segment, DropoutGradientMatchesFiniteDifferencesUnderFixedMask) {
  std::mt19937_64 rng(23);
  RnnConfig c = config_for(CellKind::lstm, 4, 6);
  c.dropout_prob = 0.4;
  const Parameters p = init_params(c);
  const Segment seg = random_segment(rng, 2, 3, c.vocab_size);
  const BatchState init = random_state(rng, c, 2);
  Parameters grads;
  std::mt19937_64 mask_rng(77);
  forward_backward_segment(seg, init, p, c, mask_rng, true, grads);
  auto loss = [&](const Parameters& q) {
    std::mt19937_64 same(77);
    Parameters scratch;
    return forward_backward_segment(seg, init, q, c, same, true, scratch).loss_sum;
  };
  const auto report = compare_with_finite_differences(p, grads, loss, 1e-5, 1e-5, 1e-8);
  EXPECT_EQ(report.failures, 0u) << report.worst_relative;
}

TEST(Segment, DropoutIsInactiveOutsideTraining) {
  std::mt19937_64 rng(2);
  RnnConfig c = config_for(CellKind::lstm, 4, 6);
  const Parameters p = init_params(c);
  const Segment seg = random_segment(rng, 2, 3, c.vocab_size);
  const double plain = forward_segment(seg, BatchState::zeros(c, 2), p, c).loss_sum;
  c.dropout_prob = 0.5;
  EXPECT_DOUBLE_EQ(forward_segment(seg, BatchState::zeros(c, 2), p, c).loss_sum, plain);
}

TEST(Segment, NonFiniteLossIsDivergence) {
  std::mt19937_64 rng(4);
  const RnnConfig c = config_for(CellKind::elman, 3, 4);
  Parameters p = init_params(c);
  p.output(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Segment seg = random_segment(rng, 1, 2, c.vocab_size);
  EXPECT_THROW(forward_segment(seg, BatchState::zeros(c, 1), p, c), DivergenceError);
}

}  // namespace
}  // namespace ncache
