#pragma once

#include <exception>
#include <iosfwd>
#include <vector>

#include "cli/experiment_config.hpp"
#include "ncache/evaluate.hpp"
#include "ncache/tuning.hpp"
#include "ncache/vocabulary.hpp"

namespace ncache::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kIoError = 3,
  kDiverged = 4,
};

// Maps an exception from a command to its process exit code.
int exit_code_for(const std::exception& e);

// Builds the vocabulary from --train and writes it to --vocab.
Vocabulary cmd_vocab(const ExperimentConfig& config, std::ostream& log);

// Trains on --train, validates on --valid, writes --checkpoint and the
// training log. On divergence the last good checkpoint is written before
// DivergenceError propagates.
TrainResult cmd_train(const ExperimentConfig& config, std::ostream& log);

// Evaluates --checkpoint on --test with the blend flags; prints the report TSV.
EvalReport cmd_eval(const ExperimentConfig& config, std::ostream& out);

// Grid sweep on --valid; writes <out-dir>/sweep.tsv and sweep_best.tsv.
SweepResult cmd_sweep(const ExperimentConfig& config, std::ostream& out);

// Per-size tuning on --valid, scored on --test (or --valid when no test
// corpus is given); writes <out-dir>/curve.tsv.
std::vector<CurvePoint> cmd_curve(const ExperimentConfig& config, std::ostream& out);

}  // namespace ncache::cli
