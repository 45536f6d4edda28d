// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace textstack {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iters = 250;
  std::uint64_t seed = 0;

  /// Requires 1 < perplexity < N-1 (the calibratable range; N/3 is the
  /// usual working guidance) and positive iterations.
  void validate(Eigen::Index n) const;
};

struct Projection2D {
  Eigen::MatrixXd coords;  // N x 2
  std::vector<int> labels;
  /// KL right after early exaggeration is lifted.
  double initial_kl = 0.0;
  double final_kl = 0.0;
  /// All-identical inputs: a seeded small-noise layout is returned instead.
  bool degenerate = false;
};

/// Exact O(N^2) t-SNE. Per-point Gaussian bandwidths are calibrated by
/// bisection until each row's perplexity is within 1e-3 of the target; the
/// layout is optimized by momentum gradient descent (0.5 then 0.8) with
/// adaptive gains and early exaggeration. Deterministic per seed.
Projection2D tsne(const Eigen::MatrixXd& points, std::vector<int> labels,
                  const TsneConfig& config);

/// Row-conditional affinities with calibrated bandwidths; exposed so tests
/// can audit per-row perplexities (written to row_perplexities if given).
Eigen::MatrixXd tsne_conditional(const Eigen::MatrixXd& points,
                                 double perplexity,
                                 std::vector<double>* row_perplexities = nullptr);

}  // namespace textstack
