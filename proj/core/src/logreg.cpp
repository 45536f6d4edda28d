// SPDX-License-Identifier: Apache-2.0
#include "textstack/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "textstack/io.hpp"
#include "textstack/rng.hpp"

namespace textstack {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd exps = shifted.array().exp();
  return exps / exps.sum();
}

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.row(r) = softmax(logits.row(r).transpose()).transpose();
  }
  return out;
}

// Mean cross-entropy over the rows of X via log-sum-exp.
double mean_cross_entropy(const LogRegModel& model, const Eigen::MatrixXd& X,
                          const std::vector<int>& y) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::VectorXd z =
        model.weights * X.row(r).transpose() + model.bias;
    double zmax = z.maxCoeff();
    double lse = zmax + std::log((z.array() - zmax).exp().sum());
    total += lse - z[y[static_cast<std::size_t>(r)]];
  }
  return total / static_cast<double>(X.rows());
}

void check_labels(const std::vector<int>& y, Eigen::Index rows, int classes) {
  if (static_cast<Eigen::Index>(y.size()) != rows) {
    throw std::runtime_error("label count does not match row count");
  }
  for (int label : y) {
    if (label < 0 || label >= classes) {
      throw std::runtime_error("label index " + std::to_string(label) +
                               " outside class range");
    }
  }
}

}  // namespace

double logreg_loss(const LogRegModel& model, const Eigen::MatrixXd& X,
                   const std::vector<int>& y) {
  return mean_cross_entropy(model, X, y) +
         0.5 * model.l2 * model.weights.squaredNorm();
}

void logreg_gradients(const LogRegModel& model, const Eigen::MatrixXd& X,
                      const std::vector<int>& y, Eigen::MatrixXd& grad_w,
                      Eigen::VectorXd& grad_b) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd probs = softmax_rows((X * model.weights.transpose()).rowwise() +
                                       model.bias.transpose());
  for (Eigen::Index r = 0; r < n; ++r) {
    probs(r, y[static_cast<std::size_t>(r)]) -= 1.0;
  }
  probs /= static_cast<double>(n);
  grad_w = probs.transpose() * X + model.l2 * model.weights;
  grad_b = probs.colwise().sum().transpose();
}

LogRegFit fit_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const LogRegConfig& config,
                     std::vector<std::string> class_names,
                     std::vector<std::string> feature_names) {
  const int classes = static_cast<int>(class_names.size());
  if (classes < 2) throw std::runtime_error("fit_logreg needs >= 2 classes");
  if (X.rows() < classes) {
    throw std::runtime_error("fit_logreg: fewer rows than classes");
  }
  if (feature_names.empty()) {
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
      feature_names.push_back("f" + std::to_string(d));
    }
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
    throw std::runtime_error("fit_logreg: feature name count mismatch");
  }
  check_labels(y, X.rows(), classes);

  LogRegFit fit;
  fit.model.weights = Eigen::MatrixXd::Zero(classes, X.cols());
  fit.model.bias = Eigen::VectorXd::Zero(classes);
  fit.model.class_names = std::move(class_names);
  fit.model.feature_names = std::move(feature_names);
  fit.model.l2 = config.l2;

  std::vector<int> class_counts(static_cast<std::size_t>(classes), 0);
  for (int label : y) ++class_counts[static_cast<std::size_t>(label)];
  for (int c = 0; c < classes; ++c) {
    if (class_counts[static_cast<std::size_t>(c)] == 0) {
      fit.warnings.push_back("class \"" + fit.model.class_names[static_cast<std::size_t>(c)] +
                             "\" has no training examples");
    }
  }

  fit.epoch_losses.push_back(logreg_loss(fit.model, X, y));

  const Eigen::Index n = X.rows();
  const Eigen::Index batch =
      config.batch_size <= 0 ? n : std::min<Eigen::Index>(config.batch_size, n);
  Rng rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch == n) {
      logreg_gradients(fit.model, X, y, grad_w, grad_b);
      fit.model.weights -= config.learning_rate * grad_w;
      fit.model.bias -= config.learning_rate * grad_b;
    } else {
      rng.shuffle(order);
      for (Eigen::Index start = 0; start < n; start += batch) {
        Eigen::Index count = std::min(batch, n - start);
        Eigen::MatrixXd xb(count, X.cols());
        std::vector<int> yb(static_cast<std::size_t>(count));
        for (Eigen::Index k = 0; k < count; ++k) {
          Eigen::Index src = order[static_cast<std::size_t>(start + k)];
          xb.row(k) = X.row(src);
          yb[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(src)];
        }
        logreg_gradients(fit.model, xb, yb, grad_w, grad_b);
        fit.model.weights -= config.learning_rate * grad_w;
        fit.model.bias -= config.learning_rate * grad_b;
      }
    }
    double loss = logreg_loss(fit.model, X, y);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("fit_logreg: non-finite loss at epoch " +
                               std::to_string(epoch + 1) +
                               " (reduce the learning rate)");
    }
    fit.epoch_losses.push_back(loss);
  }
  return fit;
}

Eigen::MatrixXd predict_proba(const LogRegModel& model,
                              const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.cols()) {
    throw std::runtime_error("predict_proba: expected " +
                             std::to_string(model.weights.cols()) +
                             " features, got " + std::to_string(X.cols()));
  }
  return softmax_rows((X * model.weights.transpose()).rowwise() +
                      model.bias.transpose());
}

Eigen::VectorXd predict_proba(const LogRegModel& model,
                              const Eigen::VectorXd& x) {
  if (x.size() != model.weights.cols()) {
    throw std::runtime_error("predict_proba: expected " +
                             std::to_string(model.weights.cols()) +
                             " features, got " + std::to_string(x.size()));
  }
  return softmax(model.weights * x + model.bias);
}

int argmax_lowest(const Eigen::VectorXd& probs) {
  int best = 0;
  for (int i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

int predict_class(const LogRegModel& model, const Eigen::VectorXd& x) {
  return argmax_lowest(predict_proba(model, x));
}

std::vector<std::pair<std::string, double>> top_coefficients(
    const LogRegModel& model, const std::string& class_name, int k) {
  auto it = std::find(model.class_names.begin(), model.class_names.end(),
                      class_name);
  if (it == model.class_names.end()) {
    throw std::runtime_error("unknown class \"" + class_name + "\"");
  }
  const Eigen::Index row = it - model.class_names.begin();
  std::vector<int> idx(static_cast<std::size_t>(model.weights.cols()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(model.weights(row, a)) > std::abs(model.weights(row, b));
  });
  std::vector<std::pair<std::string, double>> out;
  const int take = std::min<int>(std::max(k, 0), static_cast<int>(idx.size()));
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) {
    out.emplace_back(model.feature_names[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])],
                     model.weights(row, idx[static_cast<std::size_t>(i)]));
  }
  return out;
}

double gradient_check(const LogRegModel& model, const Eigen::MatrixXd& X,
                      const std::vector<int>& y, double epsilon) {
  LogRegModel probe = model;
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  logreg_gradients(probe, X, y, grad_w, grad_b);

  double worst = 0.0;
  auto check_scalar = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + epsilon;
    double plus = logreg_loss(probe, X, y);
    param = saved - epsilon;
    double minus = logreg_loss(probe, X, y);
    param = saved;
    double fd = (plus - minus) / (2.0 * epsilon);
    double denom = std::max(1e-12, std::abs(analytic) + std::abs(fd));
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  };

  for (Eigen::Index r = 0; r < probe.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < probe.weights.cols(); ++c) {
      check_scalar(probe.weights(r, c), grad_w(r, c));
    }
  }
  for (Eigen::Index r = 0; r < probe.bias.size(); ++r) {
    check_scalar(probe.bias[r], grad_b[r]);
  }
  return worst;
}

void save_logreg(const LogRegModel& model, BinaryWriter& out) {
  out.strings(model.class_names);
  out.strings(model.feature_names);
  out.f64(model.l2);
  out.mat(model.weights);
  out.vec(model.bias);
}

LogRegModel load_logreg(BinaryReader& in) {
  LogRegModel model;
  model.class_names = in.strings();
  model.feature_names = in.strings();
  model.l2 = in.f64();
  model.weights = in.mat();
  model.bias = in.vec();
  if (model.weights.rows() != static_cast<Eigen::Index>(model.class_names.size()) ||
      model.bias.size() != model.weights.rows() ||
      model.weights.cols() != static_cast<Eigen::Index>(model.feature_names.size())) {
    throw std::runtime_error("corrupt logistic regression model");
  }
  return model;
}

}  // namespace textstack
