// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "textstack/bilstm.hpp"
#include "textstack/lexicon.hpp"
#include "textstack/logreg.hpp"
#include "textstack/ngram.hpp"
#include "textstack/types.hpp"

namespace textstack {

/// Common inference surface for the base models and test doubles. Outputs
/// follow the global class order.
class TweetClassifier {
 public:
  virtual ~TweetClassifier() = default;
  virtual Eigen::VectorXd predict_proba(const ProcessedTweet& tweet) const = 0;
  virtual std::string name() const = 0;
};

/// Logistic regression over standardized, correlation-pruned lexicon
/// features, bundled with everything needed to featurize a new tweet.
class LexLrClassifier : public TweetClassifier {
 public:
  LexLrClassifier(Lexicon lexicon, Scaler scaler, std::vector<int> kept,
                  LogRegModel model);

  Eigen::VectorXd predict_proba(const ProcessedTweet& tweet) const override;
  std::string name() const override { return "lex"; }

  const Lexicon& lexicon() const { return lexicon_; }
  const Scaler& scaler() const { return scaler_; }
  const std::vector<int>& kept_features() const { return kept_; }
  const LogRegModel& model() const { return model_; }

  void save(const std::filesystem::path& path,
            const std::string& ingest_hash = "") const;
  static LexLrClassifier load(const std::filesystem::path& path,
                              std::string* ingest_hash = nullptr);

 private:
  Lexicon lexicon_;
  Scaler scaler_;
  std::vector<int> kept_;
  LogRegModel model_;
};

class NgramClassifier : public TweetClassifier {
 public:
  explicit NgramClassifier(NgramModel model) : model_(std::move(model)) {}

  Eigen::VectorXd predict_proba(const ProcessedTweet& tweet) const override {
    return ngram_predict_proba(model_, tweet.tokens);
  }
  std::string name() const override { return "ngram"; }

  const NgramModel& model() const { return model_; }

 private:
  NgramModel model_;
};

class BiLstmClassifier : public TweetClassifier {
 public:
  explicit BiLstmClassifier(BiLstmModel model) : model_(std::move(model)) {}

  Eigen::VectorXd predict_proba(const ProcessedTweet& tweet) const override {
    return bilstm_forward(model_, tweet.tokens).probs;
  }
  std::string name() const override { return "rnn"; }

  const BiLstmModel& model() const { return model_; }

 private:
  BiLstmModel model_;
};

}  // namespace textstack
