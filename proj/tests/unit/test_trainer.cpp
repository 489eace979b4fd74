#include <sstream>

#include <gtest/gtest.h>

#include "ncache/trainer.hpp"

namespace ncache {
namespace {

TokenStream repeating(std::size_t n) {
  TokenStream s;
  for (std::size_t i = 0; i < n; ++i) s.ids.push_back(static_cast<TokenId>(i % 5));
  return s;
}

RnnConfig tiny_lstm() {
  RnnConfig c;
  c.cell = CellKind::lstm;
  c.hidden_dim = 16;
  c.vocab_size = 5;
  c.init_range = 0.1;
  return c;
}

TrainOptions tiny_options() {
  TrainOptions o;
  o.lanes = 1;
  o.unroll = 5;
  o.epochs = 3;
  o.learning_rate = 0.2;
  o.clip_norm = 1.0;
  return o;
}

TEST(Train, PerplexityDecreasesOnRepeatingPattern) {
  const TokenStream s = repeating(50);
  const TrainResult r = train(s, s, tiny_lstm(), tiny_options());
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_LT(r.log[1].train_ppl, r.log[0].train_ppl);
  EXPECT_LT(r.log[2].train_ppl, r.log[1].train_ppl);
  EXPECT_LT(r.log[2].valid_ppl, r.log[0].valid_ppl);
  EXPECT_EQ(r.best_epoch, 3);
  EXPECT_FALSE(r.diverged);
  EXPECT_NEAR(stream_perplexity(r.params, tiny_lstm(), s), r.log[2].valid_ppl, 1e-9);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const TokenStream s = repeating(50);
  TrainOptions o = tiny_options();
  o.epochs = 0;
  const TrainResult r = train(s, s, tiny_lstm(), o);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.best_epoch, 0);
  EXPECT_EQ(r.params.recurrent, init_params(tiny_lstm()).recurrent);
}

TEST(Train, DeterministicForFixedSeed) {
  const TokenStream s = repeating(60);
  RnnConfig c = tiny_lstm();
  c.dropout_prob = 0.3;
  const TrainResult a = train(s, s, c, tiny_options());
  const TrainResult b = train(s, s, c, tiny_options());
  EXPECT_EQ(a.params.output, b.params.output);
  EXPECT_EQ(a.log[2].train_ppl, b.log[2].train_ppl);
}

TEST(Train, KeepsBestValidationParameters) {
  // Validation on an unrelated pattern: the returned parameters must score the
  // logged best validation perplexity.
  const TokenStream s = repeating(50);
  TokenStream valid;
  for (int i = 0; i < 30; ++i) valid.ids.push_back(static_cast<TokenId>((i * 3) % 5));
  TrainOptions o = tiny_options();
  o.epochs = 4;
  const TrainResult r = train(s, valid, tiny_lstm(), o);
  double best = 1e300;
  for (const auto& e : r.log) best = std::min(best, e.valid_ppl);
  EXPECT_NEAR(stream_perplexity(r.params, tiny_lstm(), valid), best, 1e-9);
}

TEST(Train, CallbackSeesEveryEpoch) {
  const TokenStream s = repeating(50);
  int seen = 0;
  train(s, s, tiny_lstm(), tiny_options(), [&](const EpochLog& e) { EXPECT_EQ(e.epoch, ++seen); });
  EXPECT_EQ(seen, 3);
}

TEST(StreamPerplexity, UniformModelGivesVocabularySize) {
  RnnConfig c = tiny_lstm();
  c.init_range = 0.0;
  Parameters p = Parameters::zeros(c);
  EXPECT_NEAR(stream_perplexity(p, c, repeating(40)), 5.0, 1e-9);
}

TEST(WriteTrainLog, TabSeparatedWithHeader) {
  std::ostringstream out;
  write_train_log(out, {{1, 10.5, 12.25, 3.0}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "epoch\ttrain_ppl\tvalid_ppl");
  EXPECT_NE(out.str().find("1\t10.5\t12.25"), std::string::npos);
}

}  // namespace
}  // namespace ncache
