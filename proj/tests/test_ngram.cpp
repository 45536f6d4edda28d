// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "textstack/io.hpp"
#include "textstack/ngram.hpp"
#include "textstack/rng.hpp"

using namespace textstack;

namespace {

NgramVocab vocab_of(const std::vector<std::string>& words,
                    std::int64_t buckets = 4096, int n_max = 3) {
  std::vector<ProcessedTweet> pseudo(1);
  pseudo[0].tokens = words;
  return build_ngram_vocab(pseudo, 1, buckets, n_max);
}

// Independent FNV-1a 64 (from the published constants) and span enumeration.
std::uint64_t oracle_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::int64_t> oracle_featurize(
    const std::vector<std::string>& tokens, const NgramVocab& vocab) {
  std::vector<std::int64_t> out;
  for (const auto& token : tokens) {
    auto it = vocab.index.find(token);
    if (it != vocab.index.end()) out.push_back(it->second);
  }
  for (int n = 2; n <= vocab.n_max; ++n) {
    for (std::size_t start = 0;
         start + static_cast<std::size_t>(n) <= tokens.size(); ++start) {
      std::string joined;
      for (int k = 0; k < n; ++k) {
        if (k) joined.push_back('\x1f');
        joined += tokens[start + static_cast<std::size_t>(k)];
      }
      out.push_back(static_cast<std::int64_t>(vocab.words.size()) +
                    static_cast<std::int64_t>(
                        oracle_fnv(joined) %
                        static_cast<std::uint64_t>(vocab.bucket_count)));
    }
  }
  return out;
}

std::vector<ProcessedTweet> keyword_corpus(int per_class, Rng& rng) {
  const std::vector<std::string> filler = {"the", "is", "of", "day", "to"};
  std::vector<ProcessedTweet> corpus;
  for (int i = 0; i < per_class * 2; ++i) {
    ProcessedTweet t;
    t.id = "k" + std::to_string(i);
    t.label = i % 2 == 0 ? Label::normal : Label::spam;
    const std::string keyword = i % 2 == 0 ? "sunrise" : "discount";
    const std::size_t len = 3 + rng.below(4);
    for (std::size_t w = 0; w < len; ++w) {
      t.tokens.push_back(filler[static_cast<std::size_t>(rng.below(filler.size()))]);
    }
    t.tokens[static_cast<std::size_t>(rng.below(t.tokens.size()))] = keyword;
    corpus.push_back(std::move(t));
  }
  return corpus;
}

}  // namespace

TEST_CASE("paper-pinned training defaults") {
  NgramTrainConfig config;
  CHECK(config.epochs == 10);
  CHECK(config.lr0 == 0.1);
  CHECK(config.n_max == 3);
}

TEST_CASE("featurize: 3 tokens in vocab give 3+2+1 indices") {
  auto vocab = vocab_of({"a", "b", "c"});
  auto feats = featurize({"a", "b", "c"}, vocab);
  CHECK(feats.size() == 6);
  CHECK(featurize({"a"}, vocab).size() == 1);
}

TEST_CASE("featurize: counting identity for full-vocabulary sentences") {
  auto vocab = vocab_of({"a", "b", "c", "d", "e"});
  Rng rng(17);
  for (int round = 0; round < 50; ++round) {
    const std::size_t t = 1 + rng.below(8);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < t; ++i) {
      tokens.push_back(vocab.words[static_cast<std::size_t>(rng.below(5))]);
    }
    std::size_t expected = 0;
    for (std::size_t n = 1; n <= std::min<std::size_t>(3, t); ++n) {
      expected += t - n + 1;
    }
    CHECK(featurize(tokens, vocab).size() == expected);
  }
}

TEST_CASE("featurize: OOV unigrams skipped but present in n-grams") {
  auto vocab = vocab_of({"a", "b"});
  auto feats = featurize({"a", "zzz", "b"}, vocab);
  // 2 unigrams (a, b) + 2 bigrams + 1 trigram; the OOV token only drops its
  // own unigram.
  CHECK(feats.size() == 5);
  // The bigram hash of (a, zzz) differs from (a, a): OOV text participates.
  auto h1 = ngram_bucket({"a", "zzz"}, 0, 2, vocab.bucket_count);
  auto h2 = ngram_bucket({"a", "a"}, 0, 2, vocab.bucket_count);
  CHECK(h1 != h2);
}

TEST_CASE("featurize: matches brute-force span oracle on random sequences") {
  auto vocab = vocab_of({"a", "b", "c", "d", "e"});
  Rng rng(23);
  const std::vector<std::string> tokens_pool = {"a", "b", "c", "d", "e",
                                                "oov1", "oov2"};
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> tokens;
    const std::size_t t = rng.below(7);
    for (std::size_t i = 0; i < t; ++i) {
      tokens.push_back(
          tokens_pool[static_cast<std::size_t>(rng.below(tokens_pool.size()))]);
    }
    CHECK(featurize(tokens, vocab) == oracle_featurize(tokens, vocab));
  }
}

TEST_CASE("hash: committed test vectors match across platforms") {
  std::ifstream in(std::filesystem::path(TEXTSTACK_TEST_DATA) /
                   "ngram_hash_vectors.tsv");
  REQUIRE(in.good());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tokens_joined, bucket_count_s, bucket_s;
    std::getline(ss, tokens_joined, '\t');
    std::getline(ss, bucket_count_s, '\t');
    std::getline(ss, bucket_s, '\t');
    std::vector<std::string> tokens;
    std::istringstream ts(tokens_joined);
    std::string token;
    while (ts >> token) tokens.push_back(token);
    const auto bucket_count = std::stoll(bucket_count_s);
    const auto expected = std::stoll(bucket_s);
    CAPTURE(tokens_joined);
    CHECK(ngram_bucket(tokens, 0, tokens.size(), bucket_count) == expected);
    ++rows;
  }
  CHECK(rows >= 10);
}

TEST_CASE("vocab: min_count filters and ordering is count-then-first-seen") {
  std::vector<ProcessedTweet> corpus(1);
  corpus[0].tokens = {"b", "a", "b", "c", "a", "b"};
  auto vocab = build_ngram_vocab(corpus, 2, 64, 2);
  REQUIRE(vocab.words.size() == 2);
  CHECK(vocab.words[0] == "b");  // count 3
  CHECK(vocab.words[1] == "a");  // count 2; c filtered at min_count 2
}

TEST_CASE("fit: keyword-separable classes reach held-out accuracy 1") {
  Rng rng(40);
  auto train = keyword_corpus(100, rng);
  NgramTrainConfig config;
  config.dim = 16;
  config.bucket_count = 4096;
  config.seed = 9;
  auto fit = fit_ngram(train, config);

  auto held_out = keyword_corpus(20, rng);  // fresh draws, same keywords
  int correct = 0;
  for (const auto& tweet : held_out) {
    auto probs = ngram_predict_proba(fit.model, tweet.tokens);
    const int pred = probs[0] >= probs[1] ? 0 : 1;
    if (pred == static_cast<int>(tweet.label)) ++correct;
  }
  CHECK(correct == static_cast<int>(held_out.size()));

  // Running epoch-mean loss decreases front to back.
  CHECK(fit.epoch_losses.back() < fit.epoch_losses.front());
}

TEST_CASE("fit: identical seed and config give identical models") {
  Rng rng(41);
  auto train = keyword_corpus(30, rng);
  NgramTrainConfig config;
  config.dim = 8;
  config.bucket_count = 512;
  config.seed = 4;
  auto a = fit_ngram(train, config);
  auto b = fit_ngram(train, config);
  CHECK((a.model.input - b.model.input).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.model.output - b.model.output).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predict: empty tokens give the uniform distribution") {
  Rng rng(42);
  auto fit = fit_ngram(keyword_corpus(10, rng), [] {
    NgramTrainConfig c;
    c.dim = 4;
    c.bucket_count = 64;
    return c;
  }());
  auto probs = ngram_predict_proba(fit.model, {});
  for (int c = 0; c < 4; ++c) CHECK(probs[c] == doctest::Approx(0.25));
  CHECK(probs.sum() == doctest::Approx(1.0));
}

TEST_CASE("predict: duplication invariance for unigram features") {
  Rng rng(43);
  auto train = keyword_corpus(10, rng);
  NgramTrainConfig config;
  config.dim = 4;
  config.bucket_count = 64;
  config.n_max = 1;  // mean of unigram embeddings only
  auto fit = fit_ngram(train, config);
  std::vector<std::string> tokens = {"sunrise", "the", "of"};
  std::vector<std::string> doubled = {"sunrise", "the", "of",
                                      "sunrise", "the", "of"};
  auto a = ngram_predict_proba(fit.model, tokens);
  auto b = ngram_predict_proba(fit.model, doubled);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sentence_embedding: empty input, single word, all-OOV") {
  Rng rng(44);
  auto fit = fit_ngram(keyword_corpus(10, rng), [] {
    NgramTrainConfig c;
    c.dim = 4;
    c.bucket_count = 64;
    return c;
  }());
  CHECK(sentence_embedding(fit.model, {}).norm() == 0.0);

  const std::string word = fit.model.vocab.words[0];
  Eigen::VectorXd direct = fit.model.input.row(fit.model.vocab.index.at(word));
  CHECK((sentence_embedding(fit.model, {word}) - direct).norm() == 0.0);

  // One OOV token: no unigram, no n-gram of length >= 2 in range.
  CHECK(sentence_embedding(fit.model, {"zzz"}).norm() == 0.0);
}

TEST_CASE("nearest_neighbors: planted collinear vector ranks first") {
  Rng rng(45);
  auto fit = fit_ngram(keyword_corpus(10, rng), [] {
    NgramTrainConfig c;
    c.dim = 4;
    c.bucket_count = 64;
    return c;
  }());
  auto& model = fit.model;
  const int v1 = 0;
  const int v2 = 1;
  model.input.row(v2) = 2.0 * model.input.row(v1);
  auto neighbors = nearest_neighbors(model, model.vocab.words[static_cast<std::size_t>(v1)], 3);
  REQUIRE(!neighbors.empty());
  CHECK(neighbors[0].first == model.vocab.words[static_cast<std::size_t>(v2)]);
  CHECK(neighbors[0].second == doctest::Approx(1.0));

  CHECK(nearest_neighbors(model, model.vocab.words[0], 0).empty());
  CHECK_THROWS_AS(nearest_neighbors(model, "not_in_vocab", 3),
                  std::runtime_error);
}

TEST_CASE("nearest_neighbors: matches exhaustive cosine scan") {
  Rng rng(46);
  auto fit = fit_ngram(keyword_corpus(20, rng), [] {
    NgramTrainConfig c;
    c.dim = 8;
    c.bucket_count = 128;
    return c;
  }());
  const auto& model = fit.model;
  const std::string query = model.vocab.words[2];
  const int qi = model.vocab.index.at(query);
  Eigen::VectorXd qv = model.input.row(qi);

  struct Scored {
    int index;
    double cosine;
  };
  std::vector<Scored> oracle;
  for (int w = 0; w < static_cast<int>(model.vocab.words.size()); ++w) {
    if (w == qi) continue;
    Eigen::VectorXd wv = model.input.row(w);
    oracle.push_back({w, qv.dot(wv) / (qv.norm() * wv.norm())});
  }
  std::sort(oracle.begin(), oracle.end(), [](const Scored& a, const Scored& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.index < b.index;
  });

  auto got = nearest_neighbors(model, query, 5);
  REQUIRE(got.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(got[static_cast<std::size_t>(i)].first ==
          model.vocab.words[static_cast<std::size_t>(oracle[static_cast<std::size_t>(i)].index)]);
    CHECK(got[static_cast<std::size_t>(i)].second ==
          doctest::Approx(oracle[static_cast<std::size_t>(i)].cosine));
    // Query never appears in its own neighbor list.
    CHECK(got[static_cast<std::size_t>(i)].first != query);
  }
}

TEST_CASE("analogy: a - b + b equals neighbors of a minus exclusions") {
  Rng rng(47);
  auto fit = fit_ngram(keyword_corpus(20, rng), [] {
    NgramTrainConfig c;
    c.dim = 8;
    c.bucket_count = 128;
    return c;
  }());
  const auto& model = fit.model;
  const std::string a = model.vocab.words[0];
  const std::string b = model.vocab.words[1];

  auto from_analogy = analogy(model, a, b, b, 4);
  auto from_neighbors = nearest_neighbors(model, a, 5);
  std::vector<std::pair<std::string, double>> filtered;
  for (const auto& entry : from_neighbors) {
    if (entry.first != b) filtered.push_back(entry);
  }
  filtered.resize(4);
  REQUIRE(from_analogy.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(from_analogy[i].first == filtered[i].first);
    CHECK(from_analogy[i].second == doctest::Approx(filtered[i].second));
  }

  CHECK_THROWS_AS(analogy(model, a, "missing_word", b, 2), std::runtime_error);
}

TEST_CASE("save/load: bitwise round trip and identical predictions") {
  Rng rng(48);
  auto fit = fit_ngram(keyword_corpus(15, rng), [] {
    NgramTrainConfig c;
    c.dim = 6;
    c.bucket_count = 256;
    return c;
  }());
  auto path = std::filesystem::temp_directory_path() / "ngram_roundtrip.bin";
  save_ngram(fit.model, path, "hash123");
  std::string stored_hash;
  auto loaded = load_ngram(path, &stored_hash);
  CHECK(stored_hash == "hash123");
  CHECK(loaded.vocab.words == fit.model.vocab.words);
  CHECK((loaded.input - fit.model.input).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.output - fit.model.output).cwiseAbs().maxCoeff() == 0.0);

  std::vector<std::string> probe = {"sunrise", "of", "zzz"};
  CHECK((ngram_predict_proba(loaded, probe) -
         ngram_predict_proba(fit.model, probe))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
