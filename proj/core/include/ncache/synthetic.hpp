#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ncache/corpus.hpp"

namespace ncache {

// Generator for long, non-shuffled document corpora with document-local
// recurrence. Every document draws a topic and a small cast of entity names
// and keeps reusing them, so a model that only sees a short window benefits
// from a long-range cache.
struct SyntheticCorpusSpec {
  std::uint64_t seed = 7;
  std::size_t verbs = 400;
  std::size_t adjectives = 400;
  std::size_t nouns = 1200;
  std::size_t topics = 24;
  std::size_t words_per_topic = 40;
  std::size_t entity_pool = 1500;
  std::size_t entities_per_document = 12;
  std::size_t min_document_tokens = 6000;
  std::size_t max_document_tokens = 16000;
  double entity_locality = 0.85;  // entity slot filled from the document cast
  double topic_locality = 0.8;    // topic slot filled from the document topic
};

struct SyntheticSplits {
  std::vector<Line> train;
  std::vector<Line> valid;
  std::vector<Line> test;
};

class SyntheticCorpus {
 public:
  explicit SyntheticCorpus(const SyntheticCorpusSpec& spec);

  // Documents appended until at least `min_tokens` tokens (eos included).
  std::vector<Line> generate(std::size_t min_tokens, std::uint64_t stream_seed) const;
  SyntheticSplits splits(std::size_t train_tokens, std::size_t valid_tokens,
                         std::size_t test_tokens) const;

  const SyntheticCorpusSpec& spec() const { return spec_; }

 private:
  SyntheticCorpusSpec spec_;
  std::vector<std::string> function_words_;
  std::vector<std::string> verbs_;
  std::vector<std::string> adjectives_;
  std::vector<std::string> nouns_;
  std::vector<std::vector<std::string>> topic_words_;
  std::vector<std::string> entities_;
};

void write_corpus(const std::string& path, const std::vector<Line>& lines);
std::size_t token_count_with_eos(const std::vector<Line>& lines);

}  // namespace ncache
