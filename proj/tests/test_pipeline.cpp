// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "textstack/corpus.hpp"
#include "textstack/io.hpp"
#include "textstack/pipeline.hpp"
#include "textstack/synth.hpp"

using namespace textstack;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("synth: deterministic with exact largest-remainder class counts") {
  SynthConfig config;
  config.count = 2000;
  config.seed = 5;
  auto a = generate_synthetic_corpus(config);
  auto b = generate_synthetic_corpus(config);
  REQUIRE(a.size() == 2000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].label == b[i].label);
  }

  std::size_t counts[4] = {0, 0, 0, 0};
  std::set<std::string> ids;
  for (const auto& rec : a) {
    counts[static_cast<int>(rec.label)]++;
    CHECK(ids.insert(rec.id).second);
  }
  // quotas: 1077.0, 543.0, 280.8, 99.2 -> 1077/543/281/99
  CHECK(counts[0] == 1077);
  CHECK(counts[1] == 543);
  CHECK(counts[2] == 281);
  CHECK(counts[3] == 99);
}

TEST_CASE("stage_seed: stages decorrelate from one global seed") {
  std::set<std::uint64_t> seeds;
  for (auto stage : {Stage::synth, Stage::split, Stage::oversample, Stage::lex,
                     Stage::ngram, Stage::rnn, Stage::meta, Stage::tsne,
                     Stage::embed}) {
    CHECK(seeds.insert(stage_seed(42, stage)).second);
  }
  CHECK(stage_seed(42, Stage::lex) != stage_seed(43, Stage::lex));
}

TEST_CASE("load_run_config: committed demo config parses") {
  auto config = load_run_config(std::filesystem::path(TEXTSTACK_REPO_DIR) /
                                "configs/demo.json");
  CHECK(config.seed == 42);
  CHECK(config.split.train == 0.8);
  CHECK(config.ngram_train.epochs == 10);
  CHECK(config.ngram_train.lr0 == 0.1);
  CHECK(config.rnn_train.epochs == 4);
  CHECK(config.rnn_train.learning_rate == 1e-3);
  CHECK(config.meta_train.l2_grid == std::vector<double>{0.0, 1e-4, 1e-2});
}

TEST_CASE("load_run_config: unknown keys rejected") {
  auto path = std::filesystem::temp_directory_path() / "bad_config.json";
  write_file(path, R"({"seed": 1, "typo_key": true})");
  CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("typo_key"),
                       std::runtime_error);
}

TEST_CASE("ingest: ten-record fixture splits 8/1/1 and reruns identically") {
  auto dir = fresh_dir("ts_ingest_test");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  config.seed = 11;
  config.split.stratified = false;  // 10 records of mixed classes

  std::string corpus;
  for (int i = 0; i < 10; ++i) {
    corpus += R"({"id":")" + std::to_string(i) + R"(","text":"Hello @user )" +
              std::to_string(i) + R"( #tag","label":")" +
              std::string(to_string(static_cast<Label>(i % 2))) + "\"}\n";
  }
  write_file(config.corpus, corpus);

  cmd_ingest(config);
  auto split = load_processed_split(config);
  CHECK(split.train.size() == 8);
  CHECK(split.valid.size() == 1);
  CHECK(split.test.size() == 1);
  // Normalization applied during ingest.
  CHECK(split.train.front().tokens.front() == "hello");

  const auto manifest_hash = hash_file(ingest_manifest_path(config));
  cmd_ingest(config);
  CHECK(hash_file(ingest_manifest_path(config)) == manifest_hash);
}

TEST_CASE("ingest: corrupt row aborts with a line diagnostic") {
  auto dir = fresh_dir("ts_ingest_bad");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  write_file(config.corpus,
             R"({"id":"1","text":"ok","label":"normal"})"
             "\nnot json at all\n");
  CHECK_THROWS_WITH_AS(cmd_ingest(config), doctest::Contains(":2"),
                       std::runtime_error);
}

TEST_CASE("ingest: label merge is applied before splitting") {
  auto dir = fresh_dir("ts_ingest_merge");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  config.seed = 3;
  config.merge["spam"] = "normal";

  SynthConfig synth;
  synth.count = 400;
  synth.seed = 8;
  write_jsonl_corpus(generate_synthetic_corpus(synth), config.corpus);
  cmd_ingest(config);

  auto split = load_processed_split(config);
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const auto& tweet : *part) {
      CHECK(tweet.label != Label::spam);
    }
  }
}

TEST_CASE("train: missing lexicon for lex is a configuration error") {
  auto dir = fresh_dir("ts_train_nolex");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  SynthConfig synth;
  synth.count = 120;
  synth.seed = 2;
  write_jsonl_corpus(generate_synthetic_corpus(synth), config.corpus);
  cmd_ingest(config);
  CHECK_THROWS_AS(cmd_train(config, "lex"), std::runtime_error);
  CHECK_THROWS_AS(cmd_train(config, "nonsense"), std::runtime_error);
}

TEST_CASE("train/stack: stale ingest manifest is refused") {
  auto dir = fresh_dir("ts_stale");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  config.lexicon =
      std::filesystem::path(TEXTSTACK_REPO_DIR) / "data/demo_lexicon.dic";
  config.seed = 21;
  config.ngram_train.dim = 8;
  config.ngram_train.bucket_count = 256;

  SynthConfig synth;
  synth.count = 160;
  synth.seed = 4;
  write_jsonl_corpus(generate_synthetic_corpus(synth), config.corpus);
  cmd_ingest(config);
  cmd_train(config, "ngram");

  // Re-ingest with a different seed: the manifest changes, the model is stale.
  config.seed = 22;
  cmd_ingest(config);
  CHECK_THROWS_WITH_AS(cmd_tsne(config), doctest::Contains("stale"),
                       std::runtime_error);
}

TEST_CASE("evaluate: requires prerequisite artifacts") {
  auto dir = fresh_dir("ts_eval_missing");
  RunConfig config;
  config.out_dir = dir / "out";
  CHECK_THROWS_AS(cmd_evaluate(config, "lex"), std::runtime_error);
}

TEST_CASE("train rnn: pretrained embedding file is honored") {
  auto dir = fresh_dir("ts_rnn_emb");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  config.embeddings = dir / "vectors.txt";
  config.seed = 17;
  config.rnn_train.hidden = 4;
  config.rnn_train.epochs = 1;

  SynthConfig synth;
  synth.count = 120;
  synth.seed = 9;
  write_jsonl_corpus(generate_synthetic_corpus(synth), config.corpus);
  // Tiny 3-d vector file covering a couple of frequent tokens.
  write_file(config.embeddings, "the 0.1 0.2 0.3\nto -0.1 0.0 0.1\n");

  cmd_ingest(config);
  cmd_train(config, "rnn");
  auto model = load_bilstm(model_path(config, "rnn"));
  CHECK(model.embeddings.dim() == 3);  // inferred from the file
  CHECK(model.hidden == 4);
}

TEST_CASE("ngram training loss decreases on the synthetic corpus") {
  SynthConfig synth;
  synth.count = 600;
  synth.seed = 12;
  auto tweets = process(generate_synthetic_corpus(synth));
  NgramTrainConfig config;
  config.dim = 32;
  config.bucket_count = 4096;
  config.seed = 13;
  auto fit = fit_ngram(tweets, config);
  REQUIRE(fit.epoch_losses.size() == 10);
  CHECK(fit.epoch_losses.back() < fit.epoch_losses.front());
}

TEST_CASE("feature csv export: header plus one row per tweet") {
  auto lexicon = parse_lexicon(std::filesystem::path(TEXTSTACK_REPO_DIR) /
                               "data/demo_lexicon.dic");
  SynthConfig synth;
  synth.count = 20;
  synth.seed = 3;
  auto tweets = process(generate_synthetic_corpus(synth));
  auto matrix = extract_feature_matrix(tweets, lexicon);
  auto names = feature_names(lexicon);
  auto path = std::filesystem::temp_directory_path() / "features.csv";
  write_feature_csv(path, names, matrix);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("word_count,words_per_sentence,dic,punct_pct,", 0) == 0);
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == tweets.size());
}

TEST_CASE("processed jsonl round trip") {
  auto dir = fresh_dir("ts_roundtrip");
  RunConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.out_dir = dir / "out";
  config.seed = 5;
  SynthConfig synth;
  synth.count = 60;
  synth.seed = 6;
  write_jsonl_corpus(generate_synthetic_corpus(synth), config.corpus);
  cmd_ingest(config);

  auto direct = read_processed_jsonl(processed_path(config, "train"));
  CHECK(!direct.empty());
  for (const auto& tweet : direct) {
    CHECK(!tweet.id.empty());
    for (const auto& token : tweet.tokens) CHECK(!token.empty());
  }
}
