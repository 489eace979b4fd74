#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "ncache/neural_cache.hpp"

namespace ncache {

enum class BlendMode { linear, global };

std::string_view to_string(BlendMode mode);
BlendMode parse_blend_mode(std::string_view text);

struct BlendConfig {
  BlendMode mode = BlendMode::linear;
  double lambda = 0.0;  // linear mode
  double alpha = 0.0;   // global mode
  double theta = 0.0;
  std::size_t cache_capacity = 100;
  // Clear the cache whenever the end-of-sentence token is read.
  bool reset_on_eos = false;

  void validate() const;
};

// (1 - lambda) p_vocab + lambda p_cache; p_vocab unchanged for an empty cache.
Eigen::VectorXd blend_linear(const Eigen::VectorXd& p_vocab, const SparseDistribution& p_cache,
                             double lambda);

// Single softmax over the vocabulary logits and the cache terms
// exp(theta h.h_i + alpha), with one max-subtraction shared by both.
Eigen::VectorXd blend_global(const Eigen::VectorXd& vocab_logits, const NeuralCache& cache,
                             std::span<const float> query, double theta, double alpha);

}  // namespace ncache
