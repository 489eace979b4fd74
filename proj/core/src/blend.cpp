#include "ncache/blend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncache/errors.hpp"

namespace ncache {

std::string_view to_string(BlendMode mode) { return mode == BlendMode::linear ? "linear" : "global"; }

BlendMode parse_blend_mode(std::string_view text) {
  if (text == "linear") return BlendMode::linear;
  if (text == "global") return BlendMode::global;
  throw ConfigError("unknown blend mode '" + std::string(text) + "' (expected linear|global)");
}

void BlendConfig::validate() const {
  if (mode == BlendMode::linear && !(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  if (mode == BlendMode::global && std::isnan(alpha)) throw ConfigError("alpha must be a number");
  if (!std::isfinite(theta) || theta < 0.0) throw ConfigError("theta must be finite and >= 0");
  if (cache_capacity < 1) throw ConfigError("cache capacity must be >= 1");
}

Eigen::VectorXd blend_linear(const Eigen::VectorXd& p_vocab, const SparseDistribution& p_cache,
                             double lambda) {
  if (p_cache.empty()) return p_vocab;
  Eigen::VectorXd out = (1.0 - lambda) * p_vocab;
  for (const auto& [word, p] : p_cache) {
    if (word < 0 || word >= out.size()) throw std::out_of_range("cache word outside vocabulary");
    out(word) += lambda * p;
  }
  return out;
}

Eigen::VectorXd blend_global(const Eigen::VectorXd& vocab_logits, const NeuralCache& cache,
                             std::span<const float> query, double theta, double alpha) {
  if (cache.empty()) {
    Eigen::VectorXd p = (vocab_logits.array() - vocab_logits.maxCoeff()).exp();
    return p / p.sum();
  }
  std::vector<std::pair<TokenId, double>> word_logs;
  cache.log_weights(query, theta, alpha, word_logs);

  double m = vocab_logits.maxCoeff();
  for (const auto& [word, lw] : word_logs) m = std::max(m, lw);
  Eigen::VectorXd w = (vocab_logits.array() - m).exp();
  for (const auto& [word, lw] : word_logs) {
    if (word < 0 || word >= w.size()) throw std::out_of_range("cache word outside vocabulary");
    w(word) += std::exp(lw - m);
  }
  return w / w.sum();
}

}  // namespace ncache
