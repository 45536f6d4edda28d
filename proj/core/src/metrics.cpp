// SPDX-License-Identifier: Apache-2.0
#include "textstack/metrics.hpp"

#include <stdexcept>

namespace textstack {

double accuracy(const std::vector<int>& preds, const std::vector<int>& golds) {
  if (preds.size() != golds.size()) {
    throw std::runtime_error("accuracy: prediction/gold length mismatch");
  }
  if (preds.empty()) {
    throw std::runtime_error("accuracy: empty input");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& golds,
                          std::vector<std::string> class_names) {
  if (preds.size() != golds.size()) {
    throw std::runtime_error("confusion: prediction/gold length mismatch");
  }
  const int classes = static_cast<int>(class_names.size());
  ConfusionMatrix matrix;
  matrix.class_names = std::move(class_names);
  matrix.counts = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (golds[i] < 0 || golds[i] >= classes || preds[i] < 0 ||
        preds[i] >= classes) {
      throw std::runtime_error("confusion: label outside class range at index " +
                               std::to_string(i));
    }
    matrix.counts(golds[i], preds[i]) += 1;
  }
  return matrix;
}

Eigen::MatrixXd row_normalize(const ConfusionMatrix& matrix,
                              std::vector<int>* zero_rows) {
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(matrix.counts.rows(), matrix.counts.cols());
  for (Eigen::Index r = 0; r < matrix.counts.rows(); ++r) {
    const double row_sum = matrix.counts.row(r).sum();
    if (row_sum == 0.0) {
      if (zero_rows) zero_rows->push_back(static_cast<int>(r));
      continue;
    }
    out.row(r) = matrix.counts.row(r).cast<double>() / row_sum;
  }
  return out;
}

std::vector<ClassPRF> precision_recall_f1(const ConfusionMatrix& matrix) {
  const Eigen::Index classes = matrix.counts.rows();
  std::vector<ClassPRF> out(static_cast<std::size_t>(classes));
  for (Eigen::Index c = 0; c < classes; ++c) {
    auto& prf = out[static_cast<std::size_t>(c)];
    const double tp = matrix.counts(c, c);
    const double predicted = matrix.counts.col(c).sum();
    const double gold = matrix.counts.row(c).sum();
    if (predicted == 0.0) {
      prf.precision_defined = false;
    } else {
      prf.precision = tp / predicted;
    }
    if (gold == 0.0) {
      prf.recall_defined = false;
    } else {
      prf.recall = tp / gold;
    }
    const double denom = prf.precision + prf.recall;
    prf.f1 = denom == 0.0 ? 0.0 : 2.0 * prf.precision * prf.recall / denom;
  }
  return out;
}

}  // namespace textstack
