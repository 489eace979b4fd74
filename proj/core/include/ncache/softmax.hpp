#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace ncache {

// log(sum(exp(v))) with max-subtraction.
template <class Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

template <class Derived>
Eigen::VectorXd log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  const double lse = log_sum_exp(logits);
  return logits.array() - lse;
}

template <class Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace ncache
