// SPDX-License-Identifier: Apache-2.0
#include "textstack/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "textstack/rng.hpp"

namespace textstack {

Eigen::VectorXd build_meta_features(
    const std::array<Eigen::VectorXd, kNumBaseModels>& base_probs) {
  Eigen::Index total = 0;
  for (const auto& block : base_probs) {
    double sum = block.sum();
    if (std::abs(sum - 1.0) > 1e-9 || block.minCoeff() < 0.0) {
      throw std::runtime_error(
          "meta feature block is not a probability vector (sum " +
          std::to_string(sum) + ")");
    }
    total += block.size();
  }
  Eigen::VectorXd row(total);
  Eigen::Index at = 0;
  for (const auto& block : base_probs) {
    row.segment(at, block.size()) = block;
    at += block.size();
  }
  return row;
}

std::vector<std::string> meta_feature_names() {
  static const char* bases[kNumBaseModels] = {"lex", "ngram", "rnn"};
  std::vector<std::string> names;
  names.reserve(kNumBaseModels * kNumClasses);
  for (const char* base : bases) {
    for (auto cls : kClassNames) {
      names.push_back(std::string(base) + ":p_" + std::string(cls));
    }
  }
  return names;
}

Eigen::MatrixXd meta_feature_matrix(
    const BaseModels& bases, const std::vector<ProcessedTweet>& tweets) {
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(tweets.size()),
                         kNumBaseModels * kNumClasses);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    std::array<Eigen::VectorXd, kNumBaseModels> blocks;
    for (int b = 0; b < kNumBaseModels; ++b) {
      blocks[static_cast<std::size_t>(b)] =
          bases[static_cast<std::size_t>(b)]->predict_proba(tweets[i]);
    }
    matrix.row(static_cast<Eigen::Index>(i)) =
        build_meta_features(blocks).transpose();
  }
  return matrix;
}

void check_split_disjoint(const DatasetSplit& split) {
  // Duplicate ids within one part are fine (oversampling creates them);
  // the same id in two different parts is leakage.
  auto collect = [](const std::vector<ProcessedTweet>& part) {
    std::unordered_set<std::string> ids;
    for (const auto& tweet : part) ids.insert(tweet.id);
    return ids;
  };
  const auto train_ids = collect(split.train);
  const auto valid_ids = collect(split.valid);
  const auto test_ids = collect(split.test);
  auto overlap = [](const std::unordered_set<std::string>& a,
                    const std::unordered_set<std::string>& b,
                    const char* name_a, const char* name_b) {
    for (const auto& id : a) {
      if (b.count(id)) {
        throw std::runtime_error("split leakage: id \"" + id +
                                 "\" appears in both " + name_a + " and " +
                                 name_b);
      }
    }
  };
  overlap(train_ids, valid_ids, "train", "valid");
  overlap(train_ids, test_ids, "train", "test");
  overlap(valid_ids, test_ids, "valid", "test");
}

namespace {

std::vector<int> gold_labels(const std::vector<ProcessedTweet>& tweets) {
  std::vector<int> y;
  y.reserve(tweets.size());
  for (const auto& t : tweets) y.push_back(static_cast<int>(t.label));
  return y;
}

double label_accuracy(const LogRegModel& model, const Eigen::MatrixXd& X,
                      const std::vector<int>& y) {
  Eigen::MatrixXd probs = predict_proba(model, X);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    if (best == y[static_cast<std::size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

}  // namespace

namespace {

// Shared l2-grid fit: meta LR on the given rows, selection on validation
// accuracy, earliest grid entry winning ties.
StackedFit fit_meta_grid(const Eigen::MatrixXd& train_x,
                         const std::vector<int>& train_y,
                         const Eigen::MatrixXd& valid_x,
                         const std::vector<int>& valid_y,
                         const MetaConfig& config) {
  if (config.l2_grid.empty()) {
    throw std::runtime_error("fit_meta: empty l2 grid");
  }
  StackedFit best;
  bool have_best = false;
  for (double l2 : config.l2_grid) {
    LogRegConfig lr_config;
    lr_config.learning_rate = config.learning_rate;
    lr_config.epochs = config.epochs;
    lr_config.batch_size = 0;
    lr_config.l2 = l2;
    lr_config.seed = config.seed;
    LogRegFit fit = fit_logreg(train_x, train_y, lr_config,
                               class_name_vector(), meta_feature_names());
    double acc = label_accuracy(fit.model, valid_x, valid_y);
    if (!have_best || acc > best.valid_accuracy) {
      best.model.meta = std::move(fit.model);
      best.chosen_l2 = l2;
      best.valid_accuracy = acc;
      have_best = true;
    }
  }
  return best;
}

}  // namespace

StackedFit fit_meta(const BaseModels& bases, const DatasetSplit& split,
                    const MetaConfig& config) {
  for (const auto& base : bases) {
    if (!base) throw std::runtime_error("fit_meta: missing base model");
  }
  check_split_disjoint(split);

  Eigen::MatrixXd train_x = meta_feature_matrix(bases, split.train);
  Eigen::MatrixXd valid_x = meta_feature_matrix(bases, split.valid);
  StackedFit best = fit_meta_grid(train_x, gold_labels(split.train), valid_x,
                                  gold_labels(split.valid), config);
  best.model.bases = bases;
  return best;
}

StackedFit fit_meta_oof(const BaseModels& full_train_bases,
                        const std::array<BaseFactory, kNumBaseModels>& factories,
                        const DatasetSplit& split, const MetaConfig& config) {
  for (const auto& base : full_train_bases) {
    if (!base) throw std::runtime_error("fit_meta_oof: missing base model");
  }
  for (const auto& factory : factories) {
    if (!factory) throw std::runtime_error("fit_meta_oof: missing base factory");
  }
  check_split_disjoint(split);
  const int folds = config.oof_folds;
  if (folds < 2) {
    throw std::runtime_error("fit_meta_oof: oof_folds must be >= 2");
  }

  // Folds are assigned per unique id so oversampling duplicates of a record
  // can never straddle the in/out boundary.
  std::vector<std::string> unique_ids;
  std::unordered_set<std::string> seen;
  for (const auto& tweet : split.train) {
    if (seen.insert(tweet.id).second) unique_ids.push_back(tweet.id);
  }
  if (static_cast<int>(unique_ids.size()) < folds) {
    throw std::runtime_error("fit_meta_oof: fewer unique train ids than folds");
  }
  Rng rng(mix_seed(config.seed, 0x0f1dULL));
  rng.shuffle(unique_ids);
  std::unordered_map<std::string, int> fold_of;
  for (std::size_t i = 0; i < unique_ids.size(); ++i) {
    fold_of.emplace(unique_ids[i], static_cast<int>(i % static_cast<std::size_t>(folds)));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(split.train.size());
  Eigen::MatrixXd train_x(n, kNumBaseModels * kNumClasses);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<ProcessedTweet> held_in;
    held_in.reserve(split.train.size());
    for (const auto& tweet : split.train) {
      if (fold_of.at(tweet.id) != fold) held_in.push_back(tweet);
    }
    std::array<std::shared_ptr<const TweetClassifier>, kNumBaseModels> fold_bases;
    for (int b = 0; b < kNumBaseModels; ++b) {
      fold_bases[static_cast<std::size_t>(b)] =
          factories[static_cast<std::size_t>(b)](held_in);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& tweet = split.train[static_cast<std::size_t>(i)];
      if (fold_of.at(tweet.id) != fold) continue;
      std::array<Eigen::VectorXd, kNumBaseModels> blocks;
      for (int b = 0; b < kNumBaseModels; ++b) {
        blocks[static_cast<std::size_t>(b)] =
            fold_bases[static_cast<std::size_t>(b)]->predict_proba(tweet);
      }
      train_x.row(i) = build_meta_features(blocks).transpose();
    }
  }

  Eigen::MatrixXd valid_x = meta_feature_matrix(full_train_bases, split.valid);
  StackedFit best = fit_meta_grid(train_x, gold_labels(split.train), valid_x,
                                  gold_labels(split.valid), config);
  best.model.bases = full_train_bases;
  return best;
}

StackedPrediction stacked_predict(const StackedModel& model,
                                  const ProcessedTweet& tweet) {
  std::array<Eigen::VectorXd, kNumBaseModels> blocks;
  for (int b = 0; b < kNumBaseModels; ++b) {
    blocks[static_cast<std::size_t>(b)] =
        model.bases[static_cast<std::size_t>(b)]->predict_proba(tweet);
  }
  Eigen::VectorXd row = build_meta_features(blocks);
  Eigen::VectorXd probs = predict_proba(model.meta, row);
  return {argmax_lowest(probs), std::move(probs)};
}

}  // namespace textstack
