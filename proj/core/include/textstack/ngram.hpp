// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "textstack/types.hpp"

namespace textstack {

/// Separator inserted between tokens when hashing an n-gram string.
inline constexpr char kNgramSeparator = '\x1f';

struct NgramVocab {
  std::vector<std::string> words;                // index -> word
  std::unordered_map<std::string, int> index;    // word -> index
  std::int64_t bucket_count = 2'000'000;
  int n_max = 3;

  std::int64_t table_size() const {
    return static_cast<std::int64_t>(words.size()) + bucket_count;
  }
};

/// Words kept when their train-set count reaches min_count, ordered by
/// descending count with first-occurrence ties.
NgramVocab build_ngram_vocab(const std::vector<ProcessedTweet>& train,
                             int min_count, std::int64_t bucket_count,
                             int n_max);

/// Bucket for an n-gram: FNV-1a 64 over the tokens joined with the reserved
/// separator, mod bucket_count.
std::int64_t ngram_bucket(const std::vector<std::string>& tokens,
                          std::size_t start, std::size_t n,
                          std::int64_t bucket_count);

/// One index per in-vocabulary unigram plus one hashed index per contiguous
/// n-gram for n in [2, n_max]; unigrams first, then spans by increasing n in
/// position order. Out-of-vocabulary unigrams are skipped but still
/// participate in n-gram strings.
std::vector<std::int64_t> featurize(const std::vector<std::string>& tokens,
                                    const NgramVocab& vocab);

struct NgramTrainConfig {
  int epochs = 10;
  double lr0 = 0.1;  // decays linearly to 0 across all updates
  int n_max = 3;
  int dim = 100;
  std::int64_t bucket_count = 2'000'000;
  int min_count = 1;
  std::uint64_t seed = 0;
};

/// Averaged bag-of-features linear classifier. Input embeddings cover both
/// vocabulary words and hash buckets; sentence vectors are feature means.
struct NgramModel {
  NgramVocab vocab;
  Eigen::MatrixXd input;   // (V + bucket_count) x dim
  Eigen::MatrixXd output;  // C x dim
  std::vector<std::string> class_names;

  int dim() const { return static_cast<int>(input.cols()); }
};

struct NgramFit {
  NgramModel model;
  std::vector<double> epoch_losses;  // running mean loss per epoch
};

NgramFit fit_ngram(const std::vector<ProcessedTweet>& train,
                   const NgramTrainConfig& config);

Eigen::VectorXd ngram_predict_proba(const NgramModel& model,
                                    const std::vector<std::string>& tokens);

/// Mean input embedding of the featurized indices; zero for empty input.
Eigen::VectorXd sentence_embedding(const NgramModel& model,
                                   const std::vector<std::string>& tokens);

/// Top-k vocabulary words by cosine similarity of input embeddings, query
/// excluded, ties broken by vocabulary index. Throws on OOV query.
std::vector<std::pair<std::string, double>> nearest_neighbors(
    const NgramModel& model, const std::string& word, int k);

/// Neighbors of vector(a) - vector(b) + vector(c), excluding {a, b, c}.
std::vector<std::pair<std::string, double>> analogy(const NgramModel& model,
                                                    const std::string& a,
                                                    const std::string& b,
                                                    const std::string& c,
                                                    int k);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

void save_ngram(const NgramModel& model, const std::filesystem::path& path,
                const std::string& ingest_hash = "");
NgramModel load_ngram(const std::filesystem::path& path,
                      std::string* ingest_hash = nullptr);

}  // namespace textstack
