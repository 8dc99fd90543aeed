#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "chsd/forms.hpp"

namespace testing {

inline Eigen::MatrixXd dense(const chsd::SparseBlock& b) { return Eigen::MatrixXd(b.matrix); }

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

/// max |a - b| relative to max(|b|, floor).
inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-300) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testing
