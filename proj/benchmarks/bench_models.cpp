// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "textstack/bilstm.hpp"
#include "textstack/logreg.hpp"
#include "textstack/ngram.hpp"
#include "textstack/rng.hpp"
#include "textstack/synth.hpp"

namespace {

using namespace textstack;

std::vector<ProcessedTweet> bench_corpus(int count) {
  SynthConfig config;
  config.count = count;
  config.seed = 7;
  return process(generate_synthetic_corpus(config));
}

void BM_logreg_fit_epoch(benchmark::State& state) {
  Rng rng(1);
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd x(n, 48);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 48; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(4));
  }
  LogRegConfig config;
  config.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fit_logreg(x, y, config, class_name_vector(), {}));
  }
}
BENCHMARK(BM_logreg_fit_epoch)->Arg(256)->Arg(2048);

void BM_ngram_featurize(benchmark::State& state) {
  auto tweets = bench_corpus(128);
  auto vocab = build_ngram_vocab(tweets, 1, 16384, 3);
  std::size_t at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(featurize(tweets[at % tweets.size()].tokens, vocab));
    ++at;
  }
}
BENCHMARK(BM_ngram_featurize);

void BM_ngram_fit(benchmark::State& state) {
  auto tweets = bench_corpus(static_cast<int>(state.range(0)));
  NgramTrainConfig config;
  config.dim = 32;
  config.bucket_count = 16384;
  config.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ngram(tweets, config));
  }
}
BENCHMARK(BM_ngram_fit)->Arg(512);

void BM_bilstm_forward(benchmark::State& state) {
  auto tweets = bench_corpus(64);
  auto embeddings = random_embeddings(build_rnn_vocab(tweets), 50, 3);
  auto model = make_bilstm(std::move(embeddings), static_cast<int>(state.range(0)),
                           64, 4);
  std::size_t at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bilstm_forward(model, tweets[at % tweets.size()].tokens));
    ++at;
  }
}
BENCHMARK(BM_bilstm_forward)->Arg(32)->Arg(64);

}  // namespace
