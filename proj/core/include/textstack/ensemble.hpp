// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "textstack/classifier.hpp"
#include "textstack/corpus.hpp"
#include "textstack/logreg.hpp"
#include "textstack/types.hpp"

namespace textstack {

inline constexpr int kNumBaseModels = 3;

/// Base order is part of the model contract: lexicon-LR, n-gram, BiLSTM.
using BaseModels =
    std::array<std::shared_ptr<const TweetClassifier>, kNumBaseModels>;

struct MetaConfig {
  double learning_rate = 0.1;
  int epochs = 300;
  std::vector<double> l2_grid = {0.0, 1e-4, 1e-2};
  std::uint64_t seed = 0;
  /// 0 trains the meta model on in-sample base predictions (the default,
  /// optimistically biased); k >= 2 switches to k-fold out-of-fold meta
  /// features, retraining the bases per fold.
  int oof_folds = 0;
};

struct StackedModel {
  BaseModels bases;
  LogRegModel meta;  // over 3*C concatenated probabilities
};

struct StackedFit {
  StackedModel model;
  double chosen_l2 = 0.0;
  double valid_accuracy = 0.0;
};

/// Concatenates the per-model probability blocks in base order, class order
/// within each block. Throws if a block is not row-stochastic within 1e-9.
Eigen::VectorXd build_meta_features(
    const std::array<Eigen::VectorXd, kNumBaseModels>& base_probs);

/// Feature names for the meta model: "<base>:p_<class>".
std::vector<std::string> meta_feature_names();

/// Meta matrix of base-model probabilities over a set of tweets.
Eigen::MatrixXd meta_feature_matrix(const BaseModels& bases,
                                    const std::vector<ProcessedTweet>& tweets);

/// Fits the meta logistic regression on train-split meta features, picking
/// l2 from the grid by validation accuracy (earliest entry wins ties). The
/// test split is never touched. Throws if the split parts share ids.
StackedFit fit_meta(const BaseModels& bases, const DatasetSplit& split,
                    const MetaConfig& config);

/// Trains one base model on a training subset; used by the out-of-fold
/// stacking mode to refit bases per fold.
using BaseFactory = std::function<std::shared_ptr<const TweetClassifier>(
    const std::vector<ProcessedTweet>& train)>;

/// Leakage-reduced stacking: the train split is partitioned into
/// config.oof_folds seeded folds, each fold's meta features come from bases
/// trained on the other folds, and the meta model fits on those rows. The
/// supplied full-train bases still serve inference and l2 selection on the
/// validation split.
StackedFit fit_meta_oof(const BaseModels& full_train_bases,
                        const std::array<BaseFactory, kNumBaseModels>& factories,
                        const DatasetSplit& split, const MetaConfig& config);

struct StackedPrediction {
  int label;
  Eigen::VectorXd probs;
};

/// Runs all three bases, builds the meta row, returns the meta prediction.
StackedPrediction stacked_predict(const StackedModel& model,
                                  const ProcessedTweet& tweet);

/// Throws if any id appears in more than one part.
void check_split_disjoint(const DatasetSplit& split);

}  // namespace textstack
