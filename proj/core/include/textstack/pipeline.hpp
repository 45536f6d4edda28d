// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "textstack/bilstm.hpp"
#include "textstack/corpus.hpp"
#include "textstack/ensemble.hpp"
#include "textstack/logreg.hpp"
#include "textstack/ngram.hpp"
#include "textstack/synth.hpp"
#include "textstack/tsne.hpp"

namespace textstack {

/// Per-stage seeds derive from the global seed by fixed offsets so each
/// stage is independently reproducible.
enum class Stage : std::uint64_t {
  synth = 1,
  split = 2,
  oversample = 3,
  lex = 4,
  ngram = 5,
  rnn = 6,
  meta = 7,
  tsne = 8,
  embed = 9,
};

std::uint64_t stage_seed(std::uint64_t global_seed, Stage stage);

/// Declarative run configuration; a JSON config file sets these and CLI
/// flags override individual fields.
struct RunConfig {
  std::filesystem::path corpus;
  std::string corpus_format;  // empty = infer from extension
  std::filesystem::path lexicon;
  std::filesystem::path embeddings;  // empty = seeded random init
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 42;

  SplitSpec split;            // seed field is derived, not read from config
  bool oversample_train = false;
  std::map<std::string, std::string> merge;  // label -> label

  LogRegConfig lex_train;
  NgramTrainConfig ngram_train;
  BiLstmConfig rnn_train;
  int rnn_embedding_dim = 50;  // used when no pretrained embeddings given
  MetaConfig meta_train;
  TsneConfig tsne_config;
  int tsne_sample = 500;
  int synth_count = 2000;
  int attention_min_count = 5;
};

/// Strict parse: unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& path);

// Artifact locations under out_dir.
std::filesystem::path processed_path(const RunConfig& config,
                                     const std::string& part);
std::filesystem::path ingest_manifest_path(const RunConfig& config);
std::filesystem::path model_path(const RunConfig& config,
                                 const std::string& which);
std::filesystem::path stacked_manifest_path(const RunConfig& config);

void cmd_synth(const RunConfig& config);
void cmd_ingest(const RunConfig& config);
void cmd_train(const RunConfig& config, const std::string& which);
void cmd_stack(const RunConfig& config);
void cmd_evaluate(const RunConfig& config, const std::string& which);
void cmd_tsne(const RunConfig& config);

void cmd_inspect_coef(const RunConfig& config, const std::string& class_name,
                      int k, std::ostream& out);
void cmd_inspect_neighbors(const RunConfig& config, const std::string& word,
                           int k, std::ostream& out);
void cmd_inspect_analogy(const RunConfig& config, const std::string& a,
                         const std::string& b, const std::string& c, int k,
                         std::ostream& out);
void cmd_inspect_attention(const RunConfig& config, int k, std::ostream& out);

/// Reconstructs the split from the processed JSONL artifacts.
DatasetSplit load_processed_split(const RunConfig& config);

/// Parses one processed part (JSONL of id/label/tokens).
std::vector<ProcessedTweet> read_processed_jsonl(
    const std::filesystem::path& path);

}  // namespace textstack
