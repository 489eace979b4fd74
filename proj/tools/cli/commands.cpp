#include "cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include "ncache/checkpoint.hpp"
#include "ncache/corpus.hpp"
#include "ncache/errors.hpp"
#include "ncache/io.hpp"

namespace ncache::cli {

namespace fs = std::filesystem;

namespace {

void require_path(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

void require_readable(const std::string& path, const char* flag) {
  require_path(path, flag);
  if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": no such file " + path);
}

std::string out_path(const ExperimentConfig& c, const char* name) { return (fs::path(c.out_dir) / name).string(); }

struct LoadedModel {
  Checkpoint checkpoint;
  Vocabulary vocab;
};

LoadedModel load_model(const ExperimentConfig& c) {
  require_readable(c.checkpoint, "--checkpoint");
  LoadedModel m{load_checkpoint(c.checkpoint), Vocabulary()};
  const std::string vocab_path = c.vocab.empty() ? m.checkpoint.vocab_path : c.vocab;
  require_readable(vocab_path, "--vocab");
  m.vocab = Vocabulary::load_file(vocab_path);
  if (m.vocab.content_hash() != m.checkpoint.vocab_hash) {
    throw VocabularyMismatch("vocabulary " + vocab_path + " does not match the checkpoint");
  }
  return m;
}

TokenStream load_stream(const std::string& path, const char* flag, const Vocabulary& vocab) {
  require_readable(path, flag);
  return encode(read_corpus(path), vocab, path);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return kDiverged;
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const VocabularyMismatch*>(&e) ||
      dynamic_cast<const SizingError*>(&e) || dynamic_cast<const CLI::Error*>(&e)) {
    return kConfigError;
  }
  return kInternalError;
}

Vocabulary cmd_vocab(const ExperimentConfig& c, std::ostream& log) {
  require_readable(c.train, "--train");
  require_path(c.vocab, "--vocab");
  VocabOptions options;
  options.max_size = c.max_vocab == 0 ? std::numeric_limits<std::size_t>::max() : c.max_vocab;
  options.min_count = c.min_count;
  const auto lines = read_corpus(c.train);
  Vocabulary vocab = build_vocab(flatten_with_eos(lines), options);
  write_file_atomic(c.vocab, [&](std::ostream& out) { vocab.save(out); });
  log << "vocab\t" << vocab.size() << '\t' << c.vocab << '\n';
  return vocab;
}

TrainResult cmd_train(const ExperimentConfig& c, std::ostream& log) {
  require_readable(c.vocab, "--vocab");
  require_path(c.checkpoint, "--checkpoint");
  const Vocabulary vocab = Vocabulary::load_file(c.vocab);
  const RnnConfig rnn = c.rnn_config(static_cast<int>(vocab.size()));
  const TrainOptions options = c.train_options();
  const TokenStream train_stream = load_stream(c.train, "--train", vocab);
  const TokenStream valid_stream = load_stream(c.valid, "--valid", vocab);

  TrainResult result = train(train_stream, valid_stream, rnn, options, [&](const EpochLog& e) {
    log << "epoch " << e.epoch << "\ttrain_ppl " << e.train_ppl << "\tvalid_ppl " << e.valid_ppl << "\t("
        << e.seconds << " s)\n";
    log.flush();
  });

  Checkpoint ckpt;
  ckpt.config = rnn;
  ckpt.vocab_path = c.vocab;
  ckpt.vocab_hash = vocab.content_hash();
  ckpt.params = result.params;
  save_checkpoint(c.checkpoint, ckpt);
  const std::string log_path = c.train_log.empty() ? out_path(c, "train_log.tsv") : c.train_log;
  write_file_atomic(log_path, [&](std::ostream& out) { write_train_log(out, result.log); });
  if (result.diverged) {
    throw DivergenceError("training diverged; wrote last good checkpoint (epoch " +
                          std::to_string(result.best_epoch) + ") to " + c.checkpoint);
  }
  return result;
}

EvalReport cmd_eval(const ExperimentConfig& c, std::ostream& out) {
  const BlendConfig blend = c.blend_config();
  const LoadedModel m = load_model(c);
  const TokenStream stream = load_stream(c.test, "--test", m.vocab);
  EvalOptions options;
  options.keep_per_token = !c.per_token_out.empty();
  const EvalReport report = evaluate(m.checkpoint.model(), stream, blend, options);
  write_report_tsv(out, report);
  if (!c.per_token_out.empty()) {
    write_file_atomic(c.per_token_out, [&](std::ostream& f) { write_per_token_tsv(f, report); });
  }
  if (!c.cache_dump.empty()) {
    // Replays the stream to rebuild the final cache state.
    const LanguageModel model = m.checkpoint.model();
    NeuralCache cache(blend.cache_capacity, static_cast<std::size_t>(model.config.hidden_dim), blend.theta);
    HiddenState state = HiddenState::zeros(model.config);
    for (std::size_t t = 0; t + 1 < stream.size(); ++t) {
      if (blend.reset_on_eos && stream.ids[t] == stream.eos_id) cache.clear();
      state = rnn_step(stream.ids[t], state, model.params, model.config);
      cache.push(state.h, stream.ids[t + 1]);
    }
    write_file_atomic(c.cache_dump, [&](std::ostream& f) { cache.dump_tsv(f, &m.vocab); });
  }
  return report;
}

SweepResult cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  const SweepSpec spec = c.sweep_spec();
  const LoadedModel m = load_model(c);
  const TokenStream valid = load_stream(c.valid, "--valid", m.vocab);
  const SweepResult result = sweep(m.checkpoint.model(), valid, spec);
  write_file_atomic(out_path(c, "sweep.tsv"), [&](std::ostream& f) { write_sweep_tsv(f, result); });
  write_file_atomic(out_path(c, "sweep_best.tsv"), [&](std::ostream& f) {
    f.precision(12);
    f << "mode\ttheta\tmix\tcapacity\tppl\tbase_ppl\n"
      << to_string(spec.mode) << '\t' << result.best.theta << '\t' << result.best.mix << '\t'
      << result.best.capacity << '\t' << result.best.perplexity << '\t' << result.base_perplexity << '\n';
  });
  out.precision(12);
  out << "base_ppl\t" << result.base_perplexity << "\nbest\ttheta=" << result.best.theta
      << "\tmix=" << result.best.mix << "\tcapacity=" << result.best.capacity << "\tppl=" << result.best.perplexity
      << '\n';
  return result;
}

std::vector<CurvePoint> cmd_curve(const ExperimentConfig& c, std::ostream& out) {
  const SweepSpec spec = c.sweep_spec();
  const LoadedModel m = load_model(c);
  const TokenStream valid = load_stream(c.valid, "--valid", m.vocab);
  std::vector<CurvePoint> curve;
  if (c.test.empty()) {
    curve = cache_size_curve(m.checkpoint.model(), valid, valid, spec);
  } else {
    const TokenStream test = load_stream(c.test, "--test", m.vocab);
    curve = cache_size_curve(m.checkpoint.model(), valid, test, spec);
  }
  write_file_atomic(out_path(c, "curve.tsv"), [&](std::ostream& f) { write_curve_tsv(f, curve); });
  write_curve_tsv(out, curve);
  return curve;
}

}  // namespace ncache::cli
