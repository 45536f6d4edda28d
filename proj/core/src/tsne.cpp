// SPDX-License-Identifier: Apache-2.0
#include "textstack/tsne.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "textstack/rng.hpp"

namespace textstack {

void TsneConfig::validate(Eigen::Index n) const {
  if (iterations <= 0) {
    throw std::runtime_error("tsne: iterations must be positive");
  }
  // A row's perplexity can only reach values in (1, N-1); targets outside
  // that range cannot be calibrated. N/3 is the usual working guidance.
  if (!(perplexity > 1.0) ||
      !(perplexity < static_cast<double>(n) - 1.0)) {
    throw std::runtime_error(
        "tsne: perplexity " + std::to_string(perplexity) +
        " infeasible for N=" + std::to_string(n) +
        " (need 1 < perplexity < N-1)");
  }
}

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd sq = points.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * points * points.transpose();
  d2.diagonal().setZero();
  return d2.cwiseMax(0.0);
}

// Conditional distribution for one row at precision beta; returns its
// perplexity exp(H).
double row_perplexity(const Eigen::VectorXd& d2_row, Eigen::Index self,
                      double beta, Eigen::VectorXd& p_row) {
  const Eigen::Index n = d2_row.size();
  p_row.resize(n);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    p_row[j] = j == self ? 0.0 : std::exp(-beta * d2_row[j]);
    sum += p_row[j];
  }
  if (sum <= 0.0) return 0.0;
  double entropy = 0.0;  // nats
  for (Eigen::Index j = 0; j < n; ++j) {
    p_row[j] /= sum;
    if (p_row[j] > 0.0) entropy -= p_row[j] * std::log(p_row[j]);
  }
  return std::exp(entropy);
}

}  // namespace

Eigen::MatrixXd tsne_conditional(const Eigen::MatrixXd& points,
                                 double perplexity,
                                 std::vector<double>* row_perplexities) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d2 = squared_distances(points);
  Eigen::MatrixXd conditional(n, n);
  if (row_perplexities) row_perplexities->assign(static_cast<std::size_t>(n), 0.0);

  // Calibrate well inside the documented 1e-3 contract.
  constexpr double kTol = 1e-4;
  constexpr int kMaxBisect = 200;
  Eigen::VectorXd p_row;
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double perp = row_perplexity(d2.row(i), i, beta, p_row);
    for (int iter = 0; iter < kMaxBisect && std::abs(perp - perplexity) > kTol;
         ++iter) {
      if (perp > perplexity) {
        lo = beta;  // too flat, sharpen
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
      } else {
        hi = beta;
        beta = lo == 0.0 ? beta / 2.0 : 0.5 * (lo + hi);
      }
      perp = row_perplexity(d2.row(i), i, beta, p_row);
    }
    if (std::abs(perp - perplexity) > kTol) {
      throw std::runtime_error(
          "tsne: bandwidth calibration failed for point " + std::to_string(i) +
          " (perplexity " + std::to_string(perp) + ")");
    }
    if (row_perplexities) (*row_perplexities)[static_cast<std::size_t>(i)] = perp;
    conditional.row(i) = p_row.transpose();
  }
  return conditional;
}

namespace {

double kl_divergence(const Eigen::MatrixXd& joint_p, const Eigen::MatrixXd& coords) {
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd d2 = squared_distances(coords);
  double sum_q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) sum_q += 1.0 / (1.0 + d2(i, j));
    }
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = joint_p(i, j);
      if (p <= 0.0) continue;
      const double q = std::max(1.0 / (1.0 + d2(i, j)) / sum_q, 1e-12);
      kl += p * std::log(p / q);
    }
  }
  return kl;
}

}  // namespace

Projection2D tsne(const Eigen::MatrixXd& points, std::vector<int> labels,
                  const TsneConfig& config) {
  const Eigen::Index n = points.rows();
  config.validate(n);
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
    throw std::runtime_error("tsne: label count mismatch");
  }

  Projection2D result;
  result.labels = std::move(labels);

  Rng rng(config.seed);
  Eigen::MatrixXd coords(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    coords(i, 0) = rng.gaussian() * 1e-4;
    coords(i, 1) = rng.gaussian() * 1e-4;
  }

  // All-identical inputs cannot be calibrated; return the seeded noise.
  if (squared_distances(points).maxCoeff() == 0.0) {
    result.coords = coords;
    result.degenerate = true;
    return result;
  }

  Eigen::MatrixXd conditional = tsne_conditional(points, config.perplexity);
  Eigen::MatrixXd joint_p =
      (conditional + conditional.transpose()) / (2.0 * static_cast<double>(n));
  joint_p = joint_p.cwiseMax(1e-12);
  joint_p.diagonal().setZero();

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd gradient(n, 2);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool exaggerating = iter < config.exaggeration_iters;
    const double p_scale = exaggerating ? config.exaggeration : 1.0;
    const double momentum = exaggerating ? 0.5 : 0.8;

    Eigen::MatrixXd d2 = squared_distances(coords);
    Eigen::MatrixXd q_num = (1.0 + d2.array()).inverse().matrix();
    q_num.diagonal().setZero();
    const double sum_q = q_num.sum();

    gradient.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(q_num(i, j) / sum_q, 1e-12);
        const double mult = (p_scale * joint_p(i, j) - q) * q_num(i, j);
        gradient.row(i) += 4.0 * mult * (coords.row(i) - coords.row(j));
      }
    }

    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index d = 0; d < 2; ++d) {
        const bool same_sign =
            (gradient(i, d) > 0.0) == (velocity(i, d) > 0.0);
        gains(i, d) = same_sign ? std::max(gains(i, d) * 0.8, 0.01)
                                : gains(i, d) + 0.2;
        velocity(i, d) = momentum * velocity(i, d) -
                         config.learning_rate * gains(i, d) * gradient(i, d);
        coords(i, d) += velocity(i, d);
      }
    }
    coords.rowwise() -= coords.colwise().mean();

    if (iter + 1 == config.exaggeration_iters) {
      result.initial_kl = kl_divergence(joint_p, coords);
    }
  }
  result.final_kl = kl_divergence(joint_p, coords);
  if (config.iterations <= config.exaggeration_iters) {
    result.initial_kl = result.final_kl;
  }
  result.coords = std::move(coords);
  return result;
}

}  // namespace textstack
