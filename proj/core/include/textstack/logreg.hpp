// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace textstack {

class BinaryWriter;
class BinaryReader;

struct LogRegConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  int batch_size = 0;  // 0 = full batch
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression: logits = weights * x + bias, trained by
/// minibatch gradient descent on mean cross-entropy + (l2/2)*||weights||^2.
struct LogRegModel {
  Eigen::MatrixXd weights;  // C x D
  Eigen::VectorXd bias;     // C
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;  // size D
  double l2 = 0.0;
};

struct LogRegFit {
  LogRegModel model;
  /// epoch_losses[0] is the loss at initialization, epoch_losses[e] the loss
  /// after epoch e.
  std::vector<double> epoch_losses;
  std::vector<std::string> warnings;
};

/// Zero-initialized, deterministic per seed (minibatch order is the only
/// seeded choice). Throws on non-finite loss.
LogRegFit fit_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const LogRegConfig& config,
                     std::vector<std::string> class_names,
                     std::vector<std::string> feature_names);

/// Row-stochastic probabilities for a batch.
Eigen::MatrixXd predict_proba(const LogRegModel& model,
                              const Eigen::MatrixXd& X);
Eigen::VectorXd predict_proba(const LogRegModel& model,
                              const Eigen::VectorXd& x);

/// Argmax with ties broken toward the lower class index.
int predict_class(const LogRegModel& model, const Eigen::VectorXd& x);
int argmax_lowest(const Eigen::VectorXd& probs);

/// Top-k coefficients of one class row ranked by |weight|, signs preserved.
/// Ties break toward the lower feature index.
std::vector<std::pair<std::string, double>> top_coefficients(
    const LogRegModel& model, const std::string& class_name, int k = 10);

double logreg_loss(const LogRegModel& model, const Eigen::MatrixXd& X,
                   const std::vector<int>& y);

void logreg_gradients(const LogRegModel& model, const Eigen::MatrixXd& X,
                      const std::vector<int>& y, Eigen::MatrixXd& grad_w,
                      Eigen::VectorXd& grad_b);

/// Max over parameters of |analytic - central difference| /
/// max(1e-12, |analytic| + |central difference|).
double gradient_check(const LogRegModel& model, const Eigen::MatrixXd& X,
                      const std::vector<int>& y, double epsilon = 1e-5);

void save_logreg(const LogRegModel& model, BinaryWriter& out);
LogRegModel load_logreg(BinaryReader& in);

/// Numerically stable softmax of a logit vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace textstack
