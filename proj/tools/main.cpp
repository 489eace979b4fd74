#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/experiment_config.hpp"

int main(int argc, char** argv) {
  using namespace ncache::cli;

  CLI::App app{"Recurrent language models with a continuous cache"};
  ExperimentConfig config;
  bind_options(app, config);
  app.require_subcommand(1);
  auto* vocab = app.add_subcommand("vocab", "Build the vocabulary from --train");
  auto* train = app.add_subcommand("train", "Train a model and write --checkpoint");
  auto* eval = app.add_subcommand("eval", "Evaluate --checkpoint on --test with a cache");
  auto* sweep = app.add_subcommand("sweep", "Grid-search cache hyperparameters on --valid");
  auto* curve = app.add_subcommand("curve", "Tuned perplexity per cache size, neural vs unigram");
  for (auto* sub : {vocab, train, eval, sweep, curve}) {
    sub->fallthrough();
    sub->footer("Options are shared by all subcommands; see ncache --help.");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (vocab->parsed()) {
      cmd_vocab(config, std::cerr);
    } else if (train->parsed()) {
      cmd_train(config, std::cerr);
    } else if (eval->parsed()) {
      cmd_eval(config, std::cout);
    } else if (sweep->parsed()) {
      cmd_sweep(config, std::cout);
    } else if (curve->parsed()) {
      cmd_curve(config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}
