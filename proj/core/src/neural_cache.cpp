#include "ncache/neural_cache.hpp"

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ncache/errors.hpp"

namespace ncache {

double SparseDistribution::probability(TokenId word) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), word,
                             [](const Entry& e, TokenId w) { return e.first < w; });
  return it != entries_.end() && it->first == word ? it->second : 0.0;
}

double SparseDistribution::total() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

double dot_f64(const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  double sum = 0.0;
#if defined(__AVX512F__)
  __m512d acc0 = _mm512_setzero_pd(), acc1 = _mm512_setzero_pd();
  __m512d acc2 = _mm512_setzero_pd(), acc3 = _mm512_setzero_pd();
  for (; i + 32 <= n; i += 32) {
    acc0 = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_loadu_ps(a + i)), _mm512_cvtps_pd(_mm256_loadu_ps(b + i)), acc0);
    acc1 = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_loadu_ps(a + i + 8)),
                           _mm512_cvtps_pd(_mm256_loadu_ps(b + i + 8)), acc1);
    acc2 = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_loadu_ps(a + i + 16)),
                           _mm512_cvtps_pd(_mm256_loadu_ps(b + i + 16)), acc2);
    acc3 = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_loadu_ps(a + i + 24)),
                           _mm512_cvtps_pd(_mm256_loadu_ps(b + i + 24)), acc3);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_loadu_ps(a + i)), _mm512_cvtps_pd(_mm256_loadu_ps(b + i)), acc0);
  }
  sum = _mm512_reduce_add_pd(_mm512_add_pd(_mm512_add_pd(acc0, acc1), _mm512_add_pd(acc2, acc3)));
#elif defined(__AVX2__) && defined(__FMA__)
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_cvtps_pd(_mm_loadu_ps(b + i)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i + 4)), _mm256_cvtps_pd(_mm_loadu_ps(b + i + 4)), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i + 8)), _mm256_cvtps_pd(_mm_loadu_ps(b + i + 8)), acc2);
    acc3 =
        _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i + 12)), _mm256_cvtps_pd(_mm_loadu_ps(b + i + 12)), acc3);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
#else
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 8; ++k) acc[k] += static_cast<double>(a[i + k]) * static_cast<double>(b[i + k]);
  }
  sum = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
#endif
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

NeuralCache::NeuralCache(std::size_t capacity, std::size_t dim, double theta)
    : capacity_(capacity), dim_(dim), theta_(theta) {
  if (capacity == 0) throw ConfigError("cache capacity must be >= 1");
  if (dim == 0) throw ConfigError("cache key dimension must be >= 1");
  set_theta(theta);
  keys_.resize(capacity * dim);
  values_.resize(capacity);
  slots_.resize(capacity);
}

void NeuralCache::set_theta(double theta) {
  if (!std::isfinite(theta) || theta < 0.0) throw ConfigError("theta must be finite and >= 0");
  theta_ = theta;
}

std::uint32_t NeuralCache::acquire_slot(TokenId word) {
  auto it = std::lower_bound(active_.begin(), active_.end(), word,
                             [](const auto& e, TokenId w) { return e.first < w; });
  if (it == active_.end() || it->first != word) {
    std::uint32_t slot;
    if (!free_slots_.empty()) {
      slot = free_slots_.back();
      free_slots_.pop_back();
      slot_word_[slot] = word;
      slot_refs_[slot] = 0;
    } else {
      slot = static_cast<std::uint32_t>(slot_word_.size());
      slot_word_.push_back(word);
      slot_refs_.push_back(0);
    }
    it = active_.insert(it, {word, slot});
  }
  ++slot_refs_[it->second];
  return it->second;
}

void NeuralCache::release_slot(std::uint32_t slot) {
  if (--slot_refs_[slot] == 0) {
    const TokenId word = slot_word_[slot];
    auto it = std::lower_bound(active_.begin(), active_.end(), word,
                               [](const auto& e, TokenId w) { return e.first < w; });
    active_.erase(it);
    free_slots_.push_back(slot);
  }
}

void NeuralCache::push(std::span<const float> key, TokenId next_word) {
  if (key.size() != dim_) throw std::invalid_argument("cache key has wrong dimension");
  std::size_t p;
  if (count_ == capacity_) {
    p = head_;
    release_slot(slots_[p]);
    head_ = (head_ + 1) % capacity_;
  } else {
    p = physical(count_);
    ++count_;
  }
  std::copy(key.begin(), key.end(), keys_.begin() + static_cast<std::ptrdiff_t>(p * dim_));
  values_[p] = next_word;
  slots_[p] = acquire_slot(next_word);
  ++pushes_;
}

void NeuralCache::push(const Eigen::VectorXd& key, TokenId next_word) {
  scratch_query_.resize(static_cast<std::size_t>(key.size()));
  for (Eigen::Index i = 0; i < key.size(); ++i) scratch_query_[static_cast<std::size_t>(i)] = static_cast<float>(key(i));
  push(std::span<const float>(scratch_query_), next_word);
}

void NeuralCache::clear() {
  head_ = 0;
  count_ = 0;
  pushes_ = 0;
  slot_word_.clear();
  slot_refs_.clear();
  free_slots_.clear();
  active_.clear();
}

std::span<const float> NeuralCache::key(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("cache entry index");
  return {keys_.data() + physical(i) * dim_, dim_};
}

TokenId NeuralCache::value(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("cache entry index");
  return values_[physical(i)];
}

void NeuralCache::dot_products(std::span<const float> query, std::vector<double>& out) const {
  if (query.size() != dim_) throw std::invalid_argument("cache query has wrong dimension");
  out.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    out[i] = dot_f64(query.data(), keys_.data() + physical(i) * dim_, dim_);
  }
}

double NeuralCache::accumulate_weights(std::span<const float> query, double theta, double& total) const {
  if (query.size() != dim_) throw std::invalid_argument("cache query has wrong dimension");
  // Physical order: the occupied part of the ring is scanned contiguously.
  auto& logits = scratch_logits_;
  logits.resize(count_);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < count_; ++p) {
    const double l = theta == 0.0 ? 0.0 : theta * dot_f64(query.data(), keys_.data() + p * dim_, dim_);
    logits[p] = l;
    m = std::max(m, l);
  }
  // Vectorized exp over the whole scan, then a scalar scatter into word slots.
  Eigen::Map<Eigen::ArrayXd> shifted(logits.data(), static_cast<Eigen::Index>(count_));
  shifted = (shifted - m).exp();
  auto& weights = scratch_slot_weights_;
  weights.assign(slot_word_.size(), 0.0);
  total = 0.0;
  for (std::size_t p = 0; p < count_; ++p) {
    const double w = logits[p];
    weights[slots_[p]] += w;
    total += w;
  }
  return m;
}

double NeuralCache::log_weights(std::span<const float> query, double theta, double offset,
                                std::vector<std::pair<TokenId, double>>& word_logs) const {
  word_logs.clear();
  if (count_ == 0) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  const double m = accumulate_weights(query, theta, total);
  const auto& weights = scratch_slot_weights_;
  word_logs.reserve(active_.size());
  for (const auto& [word, slot] : active_) word_logs.emplace_back(word, std::log(weights[slot]) + m + offset);
  return std::log(total) + m + offset;
}

SparseDistribution NeuralCache::score(std::span<const float> query) const {
  if (count_ == 0) return {};
  double total = 0.0;
  accumulate_weights(query, theta_, total);
  const auto& weights = scratch_slot_weights_;
  std::vector<SparseDistribution::Entry> entries;
  entries.reserve(active_.size());
  for (const auto& [word, slot] : active_) entries.emplace_back(word, weights[slot] / total);
  return SparseDistribution(std::move(entries));
}

SparseDistribution NeuralCache::score(const Eigen::VectorXd& query) const {
  std::vector<float> q(static_cast<std::size_t>(query.size()));
  for (Eigen::Index i = 0; i < query.size(); ++i) q[static_cast<std::size_t>(i)] = static_cast<float>(query(i));
  return score(std::span<const float>(q));
}

SparseDistribution NeuralCache::unigram_score() const {
  if (count_ == 0) return {};
  const double n = static_cast<double>(count_);
  std::vector<SparseDistribution::Entry> entries;
  entries.reserve(active_.size());
  for (const auto& [word, slot] : active_) entries.emplace_back(word, static_cast<double>(slot_refs_[slot]) / n);
  return SparseDistribution(std::move(entries));
}

void NeuralCache::dump_tsv(std::ostream& out, const Vocabulary* vocab) const {
  out << "position\tword\tkey_norm\n";
  const std::uint64_t first = pushes_ - count_;
  for (std::size_t i = 0; i < count_; ++i) {
    const auto k = key(i);
    const double norm = std::sqrt(dot_f64(k.data(), k.data(), dim_));
    out << first + i << '\t';
    if (vocab != nullptr && vocab->contains(value(i))) {
      out << vocab->word(value(i));
    } else {
      out << value(i);
    }
    out << '\t' << norm << '\n';
  }
}

}  // namespace ncache
