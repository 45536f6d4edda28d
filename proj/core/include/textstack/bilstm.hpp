// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "textstack/corpus.hpp"
#include "textstack/types.hpp"

namespace textstack {

/// Reserved vocabulary slot: empty tweets are routed to this learned token
/// and unseen tokens fall back to it at inference time.
inline constexpr std::string_view kNullToken = "<null>";

struct EmbeddingTable {
  std::vector<std::string> words;  // index -> word; index 0 is kNullToken
  std::unordered_map<std::string, int> index;
  Eigen::MatrixXd vectors;  // V x dim
  bool trainable = true;

  int dim() const { return static_cast<int>(vectors.cols()); }
  int lookup(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? 0 : it->second;
  }
};

/// kNullToken first, then train-set tokens by descending count
/// (first-occurrence ties).
std::vector<std::string> build_rnn_vocab(
    const std::vector<ProcessedTweet>& train);

/// Uniform random vectors in [-0.1, 0.1], deterministic per seed.
EmbeddingTable random_embeddings(std::vector<std::string> words, int dim,
                                 std::uint64_t seed);

/// Standard text word-vector format ("word v1 v2 ... vd" per line). Vocab
/// words found in the file take those vectors; missing words get uniform
/// random in [-0.1, 0.1] from the seed. Dimension is inferred from the first
/// line; inconsistent dimensions are an error.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string> words,
                               std::uint64_t seed);

/// Gate parameters for one LSTM direction.
struct LstmParams {
  Eigen::MatrixXd wi, wf, wg, wo;  // hidden x input
  Eigen::MatrixXd ui, uf, ug, uo;  // hidden x hidden
  Eigen::VectorXd bi, bf, bg, bo;  // hidden
};

struct BiLstmConfig {
  int epochs = 4;
  double learning_rate = 1e-3;
  int hidden = 64;
  int batch_size = 32;
  int max_len = 64;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  bool trainable_embeddings = true;
};

/// Bidirectional LSTM with attention pooling: per-token states from both
/// directions are concatenated, scored with a learned context vector through
/// tanh, softmax-normalized, and the weighted sum feeds a softmax output
/// layer through tanh.
struct BiLstmModel {
  EmbeddingTable embeddings;
  LstmParams fwd, bwd;
  Eigen::VectorXd attention;  // 2h
  Eigen::MatrixXd w_out;      // C x 2h
  Eigen::VectorXd b_out;      // C
  int hidden = 0;
  int max_len = 64;
  std::vector<std::string> class_names;
};

/// Fresh model with seeded uniform init; forget-gate biases start at 1.
BiLstmModel make_bilstm(EmbeddingTable embeddings, int hidden, int max_len,
                        std::uint64_t seed);

/// Per-token attention weights, padding excluded: non-negative and summing
/// to 1 over exactly the consumed tokens.
struct AttentionRecord {
  std::vector<std::string> tokens;
  Eigen::VectorXd weights;
};

struct BiLstmOutput {
  Eigen::VectorXd probs;
  AttentionRecord attention;
  bool truncated = false;
};

/// Empty inputs run on the learned null token; over-long inputs are
/// truncated to max_len (recorded, not an error).
BiLstmOutput bilstm_forward(const BiLstmModel& model,
                            const std::vector<std::string>& tokens);

struct BiLstmFit {
  BiLstmModel model;
  std::vector<double> epoch_losses;  // running mean loss per epoch
  /// Largest pre-clip global gradient norm seen, for the clipping contract.
  double max_clipped_norm = 0.0;
};

/// Adam (0.9/0.999/1e-8) on cross-entropy via backpropagation through time,
/// with global gradient-norm clipping. Deterministic per seed.
BiLstmFit fit_bilstm(const std::vector<ProcessedTweet>& train,
                     const BiLstmConfig& config, EmbeddingTable embeddings);

double bilstm_loss(const BiLstmModel& model,
                   const std::vector<std::string>& tokens, int label);

/// Analytic vs central finite-difference gradients over every parameter
/// block (gates, attention vector, output layer, embeddings if trainable)
/// for one example; returns the max relative error.
double bilstm_gradient_check(const BiLstmModel& model,
                             const std::vector<std::string>& tokens, int label,
                             double epsilon = 1e-5);

struct AttendedWord {
  std::string word;
  double mean_attention;
  int count;
};

struct AttentionTableOptions {
  int min_count = 5;
  int top_k = 10;       // negative = all
  bool use_predicted = false;  // group by predicted class instead of gold
};

/// Class-wise mean attention per word across train, validation, and test.
/// Sentinel and null tokens are excluded; words below min_count are dropped.
std::array<std::vector<AttendedWord>, kNumClasses> classwise_attention(
    const BiLstmModel& model, const DatasetSplit& split,
    const AttentionTableOptions& options = {});

void save_bilstm(const BiLstmModel& model, const std::filesystem::path& path,
                 const std::string& ingest_hash = "");
BiLstmModel load_bilstm(const std::filesystem::path& path,
                        std::string* ingest_hash = nullptr);

}  // namespace textstack
