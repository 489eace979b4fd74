// Writes train/valid/test splits of the synthetic long-document corpus.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ncache/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic non-shuffled document corpus"};
  ncache::SyntheticCorpusSpec spec;
  std::string out_dir = "corpus";
  std::size_t train_tokens = 520000;
  std::size_t valid_tokens = 40000;
  std::size_t test_tokens = 40000;
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--seed", spec.seed, "Generator seed");
  app.add_option("--train-tokens", train_tokens, "Minimum training tokens");
  app.add_option("--valid-tokens", valid_tokens, "Minimum validation tokens");
  app.add_option("--test-tokens", test_tokens, "Minimum test tokens");
  app.add_option("--verbs", spec.verbs, "Verb lexicon size");
  app.add_option("--adjectives", spec.adjectives, "Adjective lexicon size");
  app.add_option("--nouns", spec.nouns, "Common noun lexicon size");
  app.add_option("--topics", spec.topics, "Number of document topics");
  app.add_option("--words-per-topic", spec.words_per_topic, "Topical words per topic");
  app.add_option("--entity-pool", spec.entity_pool, "Named entities overall");
  app.add_option("--cast", spec.entities_per_document, "Named entities per document");
  app.add_option("--min-doc", spec.min_document_tokens, "Minimum document length in tokens");
  app.add_option("--max-doc", spec.max_document_tokens, "Maximum document length in tokens");
  app.add_option("--entity-locality", spec.entity_locality, "Probability an entity comes from the document cast");
  app.add_option("--topic-locality", spec.topic_locality, "Probability a topical word comes from the document topic");
  CLI11_PARSE(app, argc, argv);

  try {
    const ncache::SyntheticCorpus corpus(spec);
    const auto splits = corpus.splits(train_tokens, valid_tokens, test_tokens);
    const std::filesystem::path dir(out_dir);
    ncache::write_corpus((dir / "train.txt").string(), splits.train);
    ncache::write_corpus((dir / "valid.txt").string(), splits.valid);
    ncache::write_corpus((dir / "test.txt").string(), splits.test);
    std::cout << "train\t" << ncache::token_count_with_eos(splits.train) << "\nvalid\t"
              << ncache::token_count_with_eos(splits.valid) << "\ntest\t"
              << ncache::token_count_with_eos(splits.test) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
