#pragma once

#include "rdpg/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rdpg {

struct GmmConfig {
  int restarts = 10;
  int max_iters = 500;
  /// Stop when the log-likelihood gain is below tol * |loglik|.
  double tol = 1e-8;
  /// Added to every covariance diagonal in each M-step.
  double reg = 1e-6;
  std::uint64_t seed = 0;
};

struct GmmResult {
  std::vector<int> labels;  ///< 0-based component index per row
  Matrix means;             ///< K x d
  std::vector<Matrix> covs;
  Vector weights;
  double loglik = 0.0;
  /// Log-likelihood after every EM iteration of the selected restart.
  std::vector<double> trace;
  int iterations = 0;
  /// Some component emptied out again after being re-seeded.
  bool empty_component = false;
};

/// Full-covariance Gaussian mixture fitted by EM from k-means++ seeds; the
/// restart with the highest log-likelihood wins. Requires 1 <= K <= n.
GmmResult gmm_em(const Matrix& X, int K, const GmmConfig& cfg = {});

/// Fraction of vertex pairs on which the two partitions agree.
double rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace rdpg
