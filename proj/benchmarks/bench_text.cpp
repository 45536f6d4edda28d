// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "textstack/corpus.hpp"
#include "textstack/lexicon.hpp"
#include "textstack/synth.hpp"

namespace {

const std::string kSampleTweet =
    "RT @SomeUser: Check out the #BestDeal of the season!! 50% OFF "
    "everything ~today only~ https://t.co/abc123 #shopping";

void BM_normalize(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(textstack::normalize(kSampleTweet));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(kSampleTweet.size()));
}
BENCHMARK(BM_normalize);

void BM_tokenize(benchmark::State& state) {
  const std::string normalized = textstack::normalize(kSampleTweet);
  for (auto _ : state) {
    benchmark::DoNotOptimize(textstack::tokenize(normalized));
  }
}
BENCHMARK(BM_tokenize);

void BM_lexicon_extract(benchmark::State& state) {
  textstack::SynthConfig config;
  config.count = 64;
  config.seed = 1;
  auto tweets = textstack::process(textstack::generate_synthetic_corpus(config));
  auto lexicon = textstack::parse_lexicon(
      std::string(TEXTSTACK_REPO_DIR) + "/data/demo_lexicon.dic");
  std::size_t at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        textstack::extract_features(tweets[at % tweets.size()].tokens, lexicon));
    ++at;
  }
}
BENCHMARK(BM_lexicon_extract);

}  // namespace
