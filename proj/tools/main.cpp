// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point for the textstack pipeline:
//   synth -> ingest -> train {lex,ngram,rnn} -> stack -> evaluate -> inspect
//
// All settings come from a JSON config file; individual flags override it.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "textstack/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string corpus;
  std::string format;
  std::string lexicon;
  std::string embeddings;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool oversample = false;
  std::vector<std::string> merge;  // from=to pairs
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--corpus", args.corpus, "raw corpus path (overrides config)");
  cmd->add_option("--format", args.format, "corpus format: csv|tsv|jsonl");
  cmd->add_option("--lexicon", args.lexicon, "LIWC-format .dic lexicon path");
  cmd->add_option("--embeddings", args.embeddings,
                  "pretrained word-vector file (text format)");
  cmd->add_option("--out-dir", args.out_dir, "artifact output directory");
  cmd->add_option("--seed", args.seed, "global seed (per-stage seeds derive from it)");
  cmd->add_flag("--oversample", args.oversample,
                "oversample minority classes in the train split");
  cmd->add_option("--merge", args.merge,
                  "label merges as from=to (repeatable), e.g. spam=normal");
}

textstack::RunConfig resolve_config(const CLI::App* cmd, const CommonArgs& args) {
  textstack::RunConfig config;
  if (!args.config_path.empty()) {
    config = textstack::load_run_config(args.config_path);
  }
  if (cmd->count("--corpus")) config.corpus = args.corpus;
  if (cmd->count("--format")) config.corpus_format = args.format;
  if (cmd->count("--lexicon")) config.lexicon = args.lexicon;
  if (cmd->count("--embeddings")) config.embeddings = args.embeddings;
  if (cmd->count("--out-dir")) config.out_dir = args.out_dir;
  if (cmd->count("--seed")) config.seed = args.seed;
  if (cmd->count("--oversample")) config.oversample_train = args.oversample;
  if (cmd->count("--merge")) {
    config.merge.clear();
    for (const auto& pair : args.merge) {
      auto eq = pair.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
        throw CLI::ValidationError("--merge expects from=to, got \"" + pair +
                                   "\"");
      }
      config.merge[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text classification pipeline: three base models and a "
               "stacked ensemble, with interpretability tooling"};
  app.require_subcommand(1);

  CommonArgs args;
  int count = 0;
  int k = 10;
  int sample = 0;
  std::string which;
  std::string class_name;
  std::string word_a, word_b, word_c;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, args);
  synth->add_option("--count", count, "number of tweets to generate");

  auto* ingest = app.add_subcommand(
      "ingest", "normalize, tokenize, split, and persist the corpus");
  add_common(ingest, args);

  auto* train = app.add_subcommand("train", "train one base model");
  add_common(train, args);
  train->add_option("model", which, "which base model")
      ->required()
      ->check(CLI::IsMember({"lex", "ngram", "rnn"}));

  auto* stack = app.add_subcommand(
      "stack", "fit the stacked-ensemble meta model over the three bases");
  add_common(stack, args);

  auto* evaluate =
      app.add_subcommand("evaluate", "evaluate a model on the test split");
  add_common(evaluate, args);
  evaluate->add_option("model", which, "which model")
      ->required()
      ->check(CLI::IsMember({"lex", "ngram", "rnn", "stacked"}));

  auto* inspect =
      app.add_subcommand("inspect", "interpretability views (TSV to stdout)");
  inspect->require_subcommand(1);

  auto* coef = inspect->add_subcommand(
      "coef", "top logistic-regression coefficients by |weight|");
  add_common(coef, args);
  coef->add_option("--class", class_name, "class name")->required();
  coef->add_option("--k", k, "rows to print");

  auto* neighbors =
      inspect->add_subcommand("neighbors", "nearest neighbors of a word");
  add_common(neighbors, args);
  neighbors->add_option("word", word_a, "query word")->required();
  neighbors->add_option("--k", k, "rows to print");

  auto* analogy_cmd = inspect->add_subcommand(
      "analogy", "nearest neighbors of vector(a) - vector(b) + vector(c)");
  add_common(analogy_cmd, args);
  analogy_cmd->add_option("a", word_a, "word a")->required();
  analogy_cmd->add_option("b", word_b, "word b")->required();
  analogy_cmd->add_option("c", word_c, "word c")->required();
  analogy_cmd->add_option("--k", k, "rows to print");

  auto* attention = inspect->add_subcommand(
      "attention", "class-wise mean attention tables");
  add_common(attention, args);
  attention->add_option("--k", k, "rows per class");

  auto* tsne_cmd = app.add_subcommand(
      "tsne", "project test-set sentence embeddings to 2-D");
  add_common(tsne_cmd, args);
  tsne_cmd->add_option("--sample", sample, "points to sample from the test split");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      auto config = resolve_config(synth, args);
      if (synth->count("--count")) config.synth_count = count;
      textstack::cmd_synth(config);
      std::cerr << "wrote " << config.corpus.string() << "\n";
    } else if (ingest->parsed()) {
      auto config = resolve_config(ingest, args);
      textstack::cmd_ingest(config);
      std::cerr << "wrote splits and manifest under "
                << config.out_dir.string() << "\n";
    } else if (train->parsed()) {
      auto config = resolve_config(train, args);
      textstack::cmd_train(config, which);
      std::cerr << "wrote " << textstack::model_path(config, which).string()
                << "\n";
    } else if (stack->parsed()) {
      auto config = resolve_config(stack, args);
      textstack::cmd_stack(config);
      std::cerr << "wrote "
                << textstack::stacked_manifest_path(config).string() << "\n";
    } else if (evaluate->parsed()) {
      auto config = resolve_config(evaluate, args);
      textstack::cmd_evaluate(config, which);
      std::cerr << "wrote report_" << which << ".txt under "
                << config.out_dir.string() << "\n";
    } else if (coef->parsed()) {
      textstack::cmd_inspect_coef(resolve_config(coef, args), class_name, k,
                                  std::cout);
    } else if (neighbors->parsed()) {
      textstack::cmd_inspect_neighbors(resolve_config(neighbors, args), word_a,
                                       k, std::cout);
    } else if (analogy_cmd->parsed()) {
      textstack::cmd_inspect_analogy(resolve_config(analogy_cmd, args), word_a,
                                     word_b, word_c, k, std::cout);
    } else if (attention->parsed()) {
      textstack::cmd_inspect_attention(resolve_config(attention, args), k,
                                       std::cout);
    } else if (tsne_cmd->parsed()) {
      auto config = resolve_config(tsne_cmd, args);
      if (tsne_cmd->count("--sample")) config.tsne_sample = sample;
      textstack::cmd_tsne(config);
      std::cerr << "wrote tsne_coords.csv and tsne.svg under "
                << config.out_dir.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
