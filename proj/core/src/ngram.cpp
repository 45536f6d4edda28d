// SPDX-License-Identifier: Apache-2.0
#include "textstack/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "textstack/io.hpp"
#include "textstack/logreg.hpp"
#include "textstack/rng.hpp"

namespace textstack {

NgramVocab build_ngram_vocab(const std::vector<ProcessedTweet>& train,
                             int min_count, std::int64_t bucket_count,
                             int n_max) {
  if (bucket_count <= 0) throw std::runtime_error("bucket_count must be positive");
  if (n_max < 1) throw std::runtime_error("n_max must be >= 1");

  std::unordered_map<std::string, std::pair<std::int64_t, std::size_t>> counts;
  std::size_t order = 0;
  for (const auto& tweet : train) {
    for (const auto& token : tweet.tokens) {
      auto [it, inserted] = counts.try_emplace(token, 0, order);
      if (inserted) ++order;
      ++it->second.first;
    }
  }

  struct WordCount {
    std::string word;
    std::int64_t count;
    std::size_t first_seen;
  };
  std::vector<WordCount> kept;
  for (auto& [word, cs] : counts) {
    if (cs.first >= min_count) kept.push_back({word, cs.first, cs.second});
  }
  std::sort(kept.begin(), kept.end(), [](const WordCount& a, const WordCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  });

  NgramVocab vocab;
  vocab.bucket_count = bucket_count;
  vocab.n_max = n_max;
  vocab.words.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    vocab.index.emplace(kept[i].word, static_cast<int>(i));
    vocab.words.push_back(std::move(kept[i].word));
  }
  return vocab;
}

std::int64_t ngram_bucket(const std::vector<std::string>& tokens,
                          std::size_t start, std::size_t n,
                          std::int64_t bucket_count) {
  std::string joined;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) joined.push_back(kNgramSeparator);
    joined += tokens[start + k];
  }
  return static_cast<std::int64_t>(fnv1a64(joined) %
                                   static_cast<std::uint64_t>(bucket_count));
}

std::vector<std::int64_t> featurize(const std::vector<std::string>& tokens,
                                    const NgramVocab& vocab) {
  std::vector<std::int64_t> features;
  const std::size_t t = tokens.size();
  for (const auto& token : tokens) {
    if (auto it = vocab.index.find(token); it != vocab.index.end()) {
      features.push_back(it->second);
    }
  }
  const auto v = static_cast<std::int64_t>(vocab.words.size());
  for (int n = 2; n <= vocab.n_max; ++n) {
    if (static_cast<std::size_t>(n) > t) break;
    for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= t; ++start) {
      features.push_back(
          v + ngram_bucket(tokens, start, static_cast<std::size_t>(n),
                           vocab.bucket_count));
    }
  }
  return features;
}

NgramFit fit_ngram(const std::vector<ProcessedTweet>& train,
                   const NgramTrainConfig& config) {
  if (train.empty()) throw std::runtime_error("fit_ngram: empty training set");
  if (config.dim < 1) throw std::runtime_error("fit_ngram: dim must be >= 1");

  NgramFit fit;
  auto& model = fit.model;
  model.vocab = build_ngram_vocab(train, config.min_count, config.bucket_count,
                                  config.n_max);
  model.class_names = class_name_vector();
  const int classes = static_cast<int>(model.class_names.size());

  Rng rng(config.seed);
  const double bound = 1.0 / static_cast<double>(config.dim);
  model.input.resize(model.vocab.table_size(), config.dim);
  for (Eigen::Index r = 0; r < model.input.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.input.cols(); ++c) {
      model.input(r, c) = rng.uniform(-bound, bound);
    }
  }
  model.output = Eigen::MatrixXd::Zero(classes, config.dim);

  // Feature lists are fixed for the whole run; precompute them once.
  std::vector<std::vector<std::int64_t>> features(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    features[i] = featurize(train[i].tokens, model.vocab);
  }

  const std::size_t n = train.size();
  const double total_updates = static_cast<double>(config.epochs) *
                               static_cast<double>(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::size_t updates = 0;
  Eigen::VectorXd hidden(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t ex = order[pos];
      const double lr =
          config.lr0 *
          (1.0 - static_cast<double>(updates) / total_updates);
      ++updates;

      const auto& feats = features[ex];
      const int label = static_cast<int>(train[ex].label);
      if (feats.empty()) {
        epoch_loss += std::log(static_cast<double>(classes));
        continue;
      }
      hidden.setZero();
      for (std::int64_t f : feats) hidden += model.input.row(f).transpose();
      hidden /= static_cast<double>(feats.size());

      Eigen::VectorXd probs = softmax(model.output * hidden);
      epoch_loss += -std::log(std::max(probs[label], 1e-300));

      Eigen::VectorXd dz = probs;
      dz[label] -= 1.0;
      Eigen::VectorXd dhidden = model.output.transpose() * dz;
      model.output.noalias() -= lr * dz * hidden.transpose();
      const double scale = lr / static_cast<double>(feats.size());
      for (std::int64_t f : feats) {
        model.input.row(f) -= scale * dhidden.transpose();
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("fit_ngram: non-finite loss at epoch " +
                               std::to_string(epoch + 1));
    }
    fit.epoch_losses.push_back(epoch_loss);
  }
  return fit;
}

Eigen::VectorXd sentence_embedding(const NgramModel& model,
                                   const std::vector<std::string>& tokens) {
  Eigen::VectorXd hidden = Eigen::VectorXd::Zero(model.dim());
  auto feats = featurize(tokens, model.vocab);
  if (feats.empty()) return hidden;
  for (std::int64_t f : feats) hidden += model.input.row(f).transpose();
  return hidden / static_cast<double>(feats.size());
}

Eigen::VectorXd ngram_predict_proba(const NgramModel& model,
                                    const std::vector<std::string>& tokens) {
  return softmax(model.output * sentence_embedding(model, tokens));
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

namespace {

std::vector<std::pair<std::string, double>> rank_by_cosine(
    const NgramModel& model, const Eigen::VectorXd& query,
    const std::vector<int>& excluded, int k) {
  struct Scored {
    int index;
    double cosine;
  };
  std::vector<Scored> scored;
  scored.reserve(model.vocab.words.size());
  for (int w = 0; w < static_cast<int>(model.vocab.words.size()); ++w) {
    if (std::find(excluded.begin(), excluded.end(), w) != excluded.end()) {
      continue;
    }
    scored.push_back(
        {w, cosine_similarity(query, model.input.row(w).transpose())});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.index < b.index;
  });
  std::vector<std::pair<std::string, double>> out;
  const int take = std::min<int>(std::max(k, 0), static_cast<int>(scored.size()));
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) {
    out.emplace_back(model.vocab.words[static_cast<std::size_t>(scored[static_cast<std::size_t>(i)].index)],
                     scored[static_cast<std::size_t>(i)].cosine);
  }
  return out;
}

int require_word(const NgramModel& model, const std::string& word) {
  auto it = model.vocab.index.find(word);
  if (it == model.vocab.index.end()) {
    throw std::runtime_error("word \"" + word + "\" is not in the vocabulary");
  }
  return it->second;
}

}  // namespace

std::vector<std::pair<std::string, double>> nearest_neighbors(
    const NgramModel& model, const std::string& word, int k) {
  int q = require_word(model, word);
  return rank_by_cosine(model, model.input.row(q).transpose(), {q}, k);
}

std::vector<std::pair<std::string, double>> analogy(const NgramModel& model,
                                                    const std::string& a,
                                                    const std::string& b,
                                                    const std::string& c,
                                                    int k) {
  int ia = require_word(model, a);
  int ib = require_word(model, b);
  int ic = require_word(model, c);
  Eigen::VectorXd query = model.input.row(ia).transpose() -
                          model.input.row(ib).transpose() +
                          model.input.row(ic).transpose();
  return rank_by_cosine(model, query, {ia, ib, ic}, k);
}

void save_ngram(const NgramModel& model, const std::filesystem::path& path,
                const std::string& ingest_hash) {
  BinaryWriter out(path);
  out.str(kModelMagic);
  out.u32(static_cast<std::uint32_t>(ModelKind::ngram));
  out.str(ingest_hash);
  out.strings(model.class_names);
  out.strings(model.vocab.words);
  out.u64(static_cast<std::uint64_t>(model.vocab.bucket_count));
  out.u32(static_cast<std::uint32_t>(model.vocab.n_max));
  out.mat(model.input);
  out.mat(model.output);
  out.close();
}

NgramModel load_ngram(const std::filesystem::path& path,
                      std::string* ingest_hash) {
  BinaryReader in(path);
  if (in.str() != kModelMagic) {
    throw std::runtime_error("not a model file: " + path.string());
  }
  if (in.u32() != static_cast<std::uint32_t>(ModelKind::ngram)) {
    throw std::runtime_error("not an n-gram model: " + path.string());
  }
  std::string hash = in.str();
  if (ingest_hash) *ingest_hash = hash;
  NgramModel model;
  model.class_names = in.strings();
  model.vocab.words = in.strings();
  model.vocab.bucket_count = static_cast<std::int64_t>(in.u64());
  model.vocab.n_max = static_cast<int>(in.u32());
  for (std::size_t i = 0; i < model.vocab.words.size(); ++i) {
    model.vocab.index.emplace(model.vocab.words[i], static_cast<int>(i));
  }
  model.input = in.mat();
  model.output = in.mat();
  if (model.input.rows() != model.vocab.table_size()) {
    throw std::runtime_error("corrupt n-gram model: " + path.string());
  }
  return model;
}

}  // namespace textstack
