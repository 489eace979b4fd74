#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ncache/blend.hpp"
#include "ncache/corpus.hpp"
#include "ncache/rnn_lm.hpp"

namespace ncache {

struct EvalReport {
  std::size_t token_count = 0;
  double total_nll = 0.0;  // natural log
  double perplexity = 0.0;
  std::vector<double> per_token_nll;
};

struct EvalOptions {
  bool keep_per_token = false;
};

// Runs the model over the stream one token at a time. At each position the
// current hidden state is blended with the cache, the next token is scored,
// and only then is (h_t, x_{t+1}) pushed. Model parameters are read-only.
//
// Throws VocabularyMismatch if the stream was encoded with a different
// vocabulary or holds out-of-range ids, and std::invalid_argument for
// streams with fewer than two tokens.
EvalReport evaluate(const LanguageModel& model, const TokenStream& stream, const BlendConfig& blend,
                    const EvalOptions& options = {});

void check_compatible(const LanguageModel& model, const TokenStream& stream);

// `tokens<TAB>nll<TAB>ppl` header and one row.
void write_report_tsv(std::ostream& out, const EvalReport& report);
// `position<TAB>nll` rows.
void write_per_token_tsv(std::ostream& out, const EvalReport& report);

}  // namespace ncache
