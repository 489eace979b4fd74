#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncache/blend.hpp"
#include "ncache/rnn_lm.hpp"
#include "ncache/trainer.hpp"
#include "ncache/tuning.hpp"

namespace ncache::cli {

// Every experiment knob in one flat record. Config-file keys and command
// line flags share the same names (`hidden-dim = 128` <-> `--hidden-dim 128`).
struct ExperimentConfig {
  // paths
  std::string train;
  std::string valid;
  std::string test;
  std::string vocab;
  std::string checkpoint;
  std::string out_dir = ".";
  std::string train_log;      // default <out-dir>/train_log.tsv
  std::string per_token_out;  // eval: optional per-token NLL dump
  std::string cache_dump;     // eval: optional final cache contents

  // vocabulary
  std::size_t max_vocab = 0;  // 0 = unbounded
  std::uint64_t min_count = 1;

  // model
  std::string cell = "lstm";
  int hidden_dim = 128;
  std::string activation = "tanh";
  double dropout = 0.0;
  double init_range = 0.05;
  std::uint64_t seed = 1;

  // training
  std::size_t lanes = 20;
  std::size_t unroll = 30;
  int epochs = 5;
  double learning_rate = 0.2;
  double clip_norm = 0.1;
  double time_budget = 0.0;

  // cache / blend
  std::string mode = "linear";
  double lambda = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  std::size_t cache_size = 100;
  bool reset_on_eos = false;

  // sweep; empty means the built-in defaults for the mode
  std::vector<double> theta_grid;
  std::vector<double> mix_grid;
  std::vector<std::size_t> capacity_grid;

  RnnConfig rnn_config(int vocab_size) const;
  TrainOptions train_options() const;
  BlendConfig blend_config() const;
  SweepSpec sweep_spec() const;
};

// Registers every field as an option on `app` and enables `--config FILE`.
void bind_options(CLI::App& app, ExperimentConfig& config);

}  // namespace ncache::cli
