#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ncache/vocabulary.hpp"

namespace ncache {

// Word -> probability, sorted by token id. Empty for an empty cache.
class SparseDistribution {
 public:
  using Entry = std::pair<TokenId, double>;

  SparseDistribution() = default;
  explicit SparseDistribution(std::vector<Entry> sorted_entries) : entries_(std::move(sorted_entries)) {}

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  double probability(TokenId word) const;
  double total() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Dot product of float vectors, accumulated in double.
double dot_f64(const float* a, const float* b, std::size_t n);

// Bounded FIFO of (hidden state, next word) pairs. Keys are stored as raw
// float copies of the hidden state.
class NeuralCache {
 public:
  NeuralCache(std::size_t capacity, std::size_t dim, double theta = 0.0);

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  double theta() const { return theta_; }
  void set_theta(double theta);
  // Number of pushes since construction or the last clear().
  std::uint64_t total_pushes() const { return pushes_; }

  // Appends (key, next_word), evicting the oldest entry when full.
  void push(std::span<const float> key, TokenId next_word);
  void push(const Eigen::VectorXd& key, TokenId next_word);
  void clear();

  // i = 0 is the oldest entry.
  std::span<const float> key(std::size_t i) const;
  TokenId value(std::size_t i) const;

  // Per-entry dot products with `query` in insertion order.
  void dot_products(std::span<const float> query, std::vector<double>& out) const;

  // p(w) proportional to sum over entries with value w of exp(theta * query . key).
  SparseDistribution score(std::span<const float> query) const;
  SparseDistribution score(const Eigen::VectorXd& query) const;

  // Count of w among cached values over the entry count.
  SparseDistribution unigram_score() const;

  // Sum of exp(offset + theta * query . key) grouped by word, in log space:
  // returns log of the total over all entries and, through `word_logs`,
  // per-word log weights sorted by word. Empty cache gives -inf and no words.
  double log_weights(std::span<const float> query, double theta, double offset,
                     std::vector<std::pair<TokenId, double>>& word_logs) const;

  // `position<TAB>word<TAB>key_norm` per entry, oldest first.
  void dump_tsv(std::ostream& out, const Vocabulary* vocab = nullptr) const;

 private:
  std::size_t physical(std::size_t i) const { return (head_ + i) % capacity_; }
  std::uint32_t acquire_slot(TokenId word);
  // Fills scratch_slot_weights_ with exp(logit - max) summed per slot;
  // returns the max logit.
  double accumulate_weights(std::span<const float> query, double theta, double& total) const;
  void release_slot(std::uint32_t slot);

  std::size_t capacity_;
  std::size_t dim_;
  double theta_;
  std::vector<float> keys_;        // capacity x dim ring storage
  std::vector<TokenId> values_;
  std::vector<std::uint32_t> slots_;  // per-entry index into the distinct-word table
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::uint64_t pushes_ = 0;

  // Distinct words currently cached, with reference counts.
  std::vector<TokenId> slot_word_;
  std::vector<std::uint32_t> slot_refs_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<std::pair<TokenId, std::uint32_t>> active_;  // (word, slot) for cached words, sorted by word

  mutable std::vector<double> scratch_logits_;
  mutable std::vector<double> scratch_slot_weights_;
  mutable std::vector<float> scratch_query_;
};

}  // namespace ncache
