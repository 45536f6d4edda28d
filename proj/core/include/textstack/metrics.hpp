// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace textstack {

/// Gold-by-predicted count table; rows = gold, columns = predicted.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;
  std::vector<std::string> class_names;

  std::int64_t total() const { return counts.sum(); }
};

/// Exact-match fraction. Throws on length mismatch or empty input.
double accuracy(const std::vector<int>& preds, const std::vector<int>& golds);

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& golds,
                          std::vector<std::string> class_names);

/// Rows rescaled to sum to 1; all-zero rows stay zero and are reported in
/// zero_rows when requested.
Eigen::MatrixXd row_normalize(const ConfusionMatrix& matrix,
                              std::vector<int>* zero_rows = nullptr);

struct ClassPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;  // false when the class was never predicted
  bool recall_defined = true;     // false when the class has no gold examples
};

/// One-vs-rest precision/recall/F1 per class; zero denominators yield 0 with
/// the matching flag cleared.
std::vector<ClassPRF> precision_recall_f1(const ConfusionMatrix& matrix);

}  // namespace textstack
