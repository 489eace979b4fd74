#include "cli/experiment_config.hpp"

#include "ncache/errors.hpp"

namespace ncache::cli {

RnnConfig ExperimentConfig::rnn_config(int vocab_size) const {
  RnnConfig c;
  c.cell = parse_cell_kind(cell);
  c.hidden_dim = hidden_dim;
  c.vocab_size = vocab_size;
  c.dropout_prob = dropout;
  c.activation = parse_activation(activation);
  c.init_range = init_range;
  c.seed = seed;
  c.validate();
  return c;
}

TrainOptions ExperimentConfig::train_options() const {
  if (lanes < 1 || unroll < 1) throw ConfigError("lanes and unroll must be >= 1");
  TrainOptions o;
  o.lanes = lanes;
  o.unroll = unroll;
  o.epochs = epochs;
  o.learning_rate = learning_rate;
  o.clip_norm = clip_norm;
  o.time_budget_seconds = time_budget;
  return o;
}

BlendConfig ExperimentConfig::blend_config() const {
  BlendConfig b;
  b.mode = parse_blend_mode(mode);
  b.lambda = lambda;
  b.alpha = alpha;
  b.theta = theta;
  b.cache_capacity = cache_size;
  b.reset_on_eos = reset_on_eos;
  b.validate();
  return b;
}

SweepSpec ExperimentConfig::sweep_spec() const {
  SweepSpec s = SweepSpec::defaults(parse_blend_mode(mode));
  if (!theta_grid.empty()) s.theta_grid = theta_grid;
  if (!mix_grid.empty()) s.mix_grid = mix_grid;
  if (!capacity_grid.empty()) s.capacity_grid = capacity_grid;
  s.reset_on_eos = reset_on_eos;
  s.validate();
  return s;
}

void bind_options(CLI::App& app, ExperimentConfig& c) {
  app.set_config("--config", "", "Flat key = value file; keys mirror the long flags");

  app.add_option("--train", c.train, "Training corpus");
  app.add_option("--valid", c.valid, "Validation corpus");
  app.add_option("--test", c.test, "Evaluation corpus");
  app.add_option("--vocab", c.vocab, "Vocabulary file (token<TAB>count)");
  app.add_option("--checkpoint", c.checkpoint, "Model checkpoint path");
  app.add_option("--out-dir", c.out_dir, "Directory for TSV outputs");
  app.add_option("--train-log", c.train_log, "Training log path");
  app.add_option("--per-token-out", c.per_token_out, "Per-token NLL dump (eval)");
  app.add_option("--cache-dump", c.cache_dump, "Final cache contents as TSV (eval)");

  app.add_option("--max-vocab", c.max_vocab, "Vocabulary size cap incl. reserved tokens; 0 = unbounded");
  app.add_option("--min-count", c.min_count, "Minimum token count");

  app.add_option("--cell", c.cell, "lstm | elman");
  app.add_option("--hidden-dim", c.hidden_dim, "Hidden units");
  app.add_option("--activation", c.activation, "Elman non-linearity: tanh | logistic");
  app.add_option("--dropout", c.dropout, "Dropout probability on the softmax input");
  app.add_option("--init-range", c.init_range, "Uniform init half-width");
  app.add_option("--seed", c.seed, "Random seed");

  app.add_option("--lanes", c.lanes, "Batch lanes");
  app.add_option("--unroll", c.unroll, "Truncated BPTT steps");
  app.add_option("--epochs", c.epochs, "Training epochs");
  app.add_option("--lr", c.learning_rate, "Adagrad learning rate");
  app.add_option("--clip", c.clip_norm, "Global gradient norm cap");
  app.add_option("--time-budget", c.time_budget, "Training wall-clock budget in seconds; 0 = none");

  app.add_option("--mode", c.mode, "Blend mode: linear | global");
  app.add_option("--lambda", c.lambda, "Linear interpolation weight");
  app.add_option("--alpha", c.alpha, "Global normalization cache offset");
  app.add_option("--theta", c.theta, "Cache flatness");
  app.add_option("--cache-size", c.cache_size, "Cache capacity");
  app.add_flag("--reset-on-eos", c.reset_on_eos, "Clear the cache at every end-of-sentence token");

  app.add_option("--theta-grid", c.theta_grid, "Sweep theta values")->delimiter(',');
  app.add_option("--mix-grid", c.mix_grid, "Sweep lambda (linear) or alpha (global) values")->delimiter(',');
  app.add_option("--capacity-grid", c.capacity_grid, "Sweep cache sizes")->delimiter(',');
}

}  // namespace ncache::cli
