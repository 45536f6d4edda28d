// SPDX-License-Identifier: Apache-2.0
#include "textstack/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "textstack/classifier.hpp"
#include "textstack/io.hpp"
#include "textstack/report.hpp"
#include "textstack/rng.hpp"

namespace textstack {

using nlohmann::json;

std::uint64_t stage_seed(std::uint64_t global_seed, Stage stage) {
  return mix_seed(global_seed, static_cast<std::uint64_t>(stage));
}

namespace {

void check_known_keys(const json& obj, const std::string& where,
                      std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw std::runtime_error("config: unknown key \"" + key + "\" in " +
                               where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

void read_path(const json& obj, const char* key, std::filesystem::path& out) {
  if (obj.contains(key)) out = obj[key].get<std::string>();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  check_known_keys(root, "top level",
                   {"corpus", "format", "lexicon", "embeddings", "out_dir",
                    "seed", "split", "oversample", "merge_labels", "lex",
                    "ngram", "rnn", "meta", "tsne", "synth"});

  RunConfig config;
  read_path(root, "corpus", config.corpus);
  read_field(root, "format", config.corpus_format);
  read_path(root, "lexicon", config.lexicon);
  read_path(root, "embeddings", config.embeddings);
  read_path(root, "out_dir", config.out_dir);
  read_field(root, "seed", config.seed);
  read_field(root, "oversample", config.oversample_train);

  if (root.contains("split")) {
    const auto& split = root["split"];
    check_known_keys(split, "split", {"train", "valid", "test", "stratified"});
    read_field(split, "train", config.split.train);
    read_field(split, "valid", config.split.valid);
    read_field(split, "test", config.split.test);
    read_field(split, "stratified", config.split.stratified);
  }
  if (root.contains("merge_labels")) {
    for (const auto& [from, to] : root["merge_labels"].items()) {
      config.merge[from] = to.get<std::string>();
    }
  }
  if (root.contains("lex")) {
    const auto& lex = root["lex"];
    check_known_keys(lex, "lex",
                     {"learning_rate", "epochs", "batch_size", "l2"});
    read_field(lex, "learning_rate", config.lex_train.learning_rate);
    read_field(lex, "epochs", config.lex_train.epochs);
    read_field(lex, "batch_size", config.lex_train.batch_size);
    read_field(lex, "l2", config.lex_train.l2);
  }
  if (root.contains("ngram")) {
    const auto& ngram = root["ngram"];
    check_known_keys(ngram, "ngram",
                     {"epochs", "lr0", "n_max", "dim", "buckets", "min_count"});
    read_field(ngram, "epochs", config.ngram_train.epochs);
    read_field(ngram, "lr0", config.ngram_train.lr0);
    read_field(ngram, "n_max", config.ngram_train.n_max);
    read_field(ngram, "dim", config.ngram_train.dim);
    read_field(ngram, "buckets", config.ngram_train.bucket_count);
    read_field(ngram, "min_count", config.ngram_train.min_count);
  }
  if (root.contains("rnn")) {
    const auto& rnn = root["rnn"];
    check_known_keys(rnn, "rnn",
                     {"epochs", "learning_rate", "hidden", "batch_size",
                      "max_len", "clip_norm", "trainable_embeddings",
                      "embedding_dim", "attention_min_count"});
    read_field(rnn, "epochs", config.rnn_train.epochs);
    read_field(rnn, "learning_rate", config.rnn_train.learning_rate);
    read_field(rnn, "hidden", config.rnn_train.hidden);
    read_field(rnn, "batch_size", config.rnn_train.batch_size);
    read_field(rnn, "max_len", config.rnn_train.max_len);
    read_field(rnn, "clip_norm", config.rnn_train.clip_norm);
    read_field(rnn, "trainable_embeddings",
               config.rnn_train.trainable_embeddings);
    read_field(rnn, "embedding_dim", config.rnn_embedding_dim);
    read_field(rnn, "attention_min_count", config.attention_min_count);
  }
  if (root.contains("meta")) {
    const auto& meta = root["meta"];
    check_known_keys(meta, "meta",
                     {"learning_rate", "epochs", "l2_grid", "oof_folds"});
    read_field(meta, "learning_rate", config.meta_train.learning_rate);
    read_field(meta, "epochs", config.meta_train.epochs);
    read_field(meta, "l2_grid", config.meta_train.l2_grid);
    read_field(meta, "oof_folds", config.meta_train.oof_folds);
  }
  if (root.contains("tsne")) {
    const auto& tsne = root["tsne"];
    check_known_keys(tsne, "tsne",
                     {"perplexity", "iterations", "learning_rate",
                      "exaggeration", "exaggeration_iters", "sample"});
    read_field(tsne, "perplexity", config.tsne_config.perplexity);
    read_field(tsne, "iterations", config.tsne_config.iterations);
    read_field(tsne, "learning_rate", config.tsne_config.learning_rate);
    read_field(tsne, "exaggeration", config.tsne_config.exaggeration);
    read_field(tsne, "exaggeration_iters",
               config.tsne_config.exaggeration_iters);
    read_field(tsne, "sample", config.tsne_sample);
  }
  if (root.contains("synth")) {
    const auto& synth = root["synth"];
    check_known_keys(synth, "synth", {"count"});
    read_field(synth, "count", config.synth_count);
  }
  return config;
}

std::filesystem::path processed_path(const RunConfig& config,
                                     const std::string& part) {
  return config.out_dir / ("processed_" + part + ".jsonl");
}

std::filesystem::path ingest_manifest_path(const RunConfig& config) {
  return config.out_dir / "ingest_manifest.json";
}

std::filesystem::path model_path(const RunConfig& config,
                                 const std::string& which) {
  return config.out_dir / ("model_" + which + ".bin");
}

std::filesystem::path stacked_manifest_path(const RunConfig& config) {
  return config.out_dir / "stacked_manifest.json";
}

namespace {

std::array<Label, kNumClasses> merge_mapping(const RunConfig& config) {
  std::array<Label, kNumClasses> mapping;
  for (int c = 0; c < kNumClasses; ++c) mapping[static_cast<std::size_t>(c)] = static_cast<Label>(c);
  for (const auto& [from, to] : config.merge) {
    mapping[static_cast<std::size_t>(label_from_string(from))] =
        label_from_string(to);
  }
  return mapping;
}

void write_processed_jsonl(const std::vector<ProcessedTweet>& tweets,
                           const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& tweet : tweets) {
    json obj;
    obj["id"] = tweet.id;
    obj["label"] = std::string(to_string(tweet.label));
    obj["tokens"] = tweet.tokens;
    out << obj.dump() << "\n";
  }
  write_file(path, out.str());
}

json class_count_json(const std::vector<ProcessedTweet>& tweets) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& tweet : tweets) {
    counts[static_cast<std::size_t>(tweet.label)] += 1;
  }
  json obj;
  for (int c = 0; c < kNumClasses; ++c) {
    obj[std::string(kClassNames[static_cast<std::size_t>(c)])] =
        counts[static_cast<std::size_t>(c)];
  }
  return obj;
}

std::string current_ingest_hash(const RunConfig& config) {
  auto path = ingest_manifest_path(config);
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("missing ingest manifest " + path.string() +
                             " (run `ingest` first)");
  }
  return hash_file(path);
}

void require_fresh(const std::string& model_hash,
                   const std::string& current_hash,
                   const std::filesystem::path& model) {
  if (model_hash != current_hash) {
    throw std::runtime_error(
        "stale artifact: " + model.string() +
        " was trained against a different ingest manifest (run the pipeline "
        "from `ingest` again)");
  }
}

void write_loss_log(const std::vector<double>& losses,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch\tloss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", losses[i]);
    out << i << "\t" << buf << "\n";
  }
  write_file(path, out.str());
}

std::vector<int> gold_labels(const std::vector<ProcessedTweet>& tweets) {
  std::vector<int> y;
  y.reserve(tweets.size());
  for (const auto& t : tweets) y.push_back(static_cast<int>(t.label));
  return y;
}

ModelEval evaluate_classifier(const TweetClassifier& classifier,
                              const std::vector<ProcessedTweet>& test) {
  std::vector<int> preds;
  preds.reserve(test.size());
  for (const auto& tweet : test) {
    preds.push_back(argmax_lowest(classifier.predict_proba(tweet)));
  }
  ModelEval eval;
  eval.name = classifier.name();
  std::vector<int> golds = gold_labels(test);
  eval.accuracy = accuracy(preds, golds);
  eval.confusion = confusion(preds, golds, class_name_vector());
  eval.prf = precision_recall_f1(eval.confusion);
  return eval;
}

LogRegModel load_meta_model(const std::filesystem::path& path,
                            std::string* ingest_hash) {
  BinaryReader in(path);
  if (in.str() != kModelMagic) {
    throw std::runtime_error("not a model file: " + path.string());
  }
  if (in.u32() != static_cast<std::uint32_t>(ModelKind::logreg)) {
    throw std::runtime_error("not a logistic regression model: " +
                             path.string());
  }
  std::string hash = in.str();
  if (ingest_hash) *ingest_hash = hash;
  return load_logreg(in);
}

void save_meta_model(const LogRegModel& model,
                     const std::filesystem::path& path,
                     const std::string& ingest_hash) {
  BinaryWriter out(path);
  out.str(kModelMagic);
  out.u32(static_cast<std::uint32_t>(ModelKind::logreg));
  out.str(ingest_hash);
  save_logreg(model, out);
  out.close();
}

}  // namespace

std::vector<ProcessedTweet> read_processed_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read processed file: " + path.string());
  }
  std::vector<ProcessedTweet> tweets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
    ProcessedTweet tweet;
    tweet.id = obj.at("id").get<std::string>();
    tweet.label = label_from_string(obj.at("label").get<std::string>());
    tweet.tokens = obj.at("tokens").get<std::vector<std::string>>();
    tweets.push_back(std::move(tweet));
  }
  return tweets;
}

DatasetSplit load_processed_split(const RunConfig& config) {
  DatasetSplit split;
  split.train = read_processed_jsonl(processed_path(config, "train"));
  split.valid = read_processed_jsonl(processed_path(config, "valid"));
  split.test = read_processed_jsonl(processed_path(config, "test"));
  split.spec = config.split;
  split.spec.seed = stage_seed(config.seed, Stage::split);
  return split;
}

void cmd_synth(const RunConfig& config) {
  if (config.corpus.empty()) {
    throw std::runtime_error("synth: config has no corpus output path");
  }
  SynthConfig synth;
  synth.count = config.synth_count;
  synth.seed = stage_seed(config.seed, Stage::synth);
  auto records = generate_synthetic_corpus(synth);
  if (config.corpus.has_parent_path()) {
    std::filesystem::create_directories(config.corpus.parent_path());
  }
  write_jsonl_corpus(records, config.corpus);
}

void cmd_ingest(const RunConfig& config) {
  if (config.corpus.empty()) {
    throw std::runtime_error("ingest: no corpus path configured");
  }
  CorpusFormat format = config.corpus_format.empty()
                            ? corpus_format_from_path(config.corpus)
                            : corpus_format_from_string(config.corpus_format);
  auto records = load_corpus(config.corpus, format);
  if (records.empty()) {
    throw std::runtime_error("ingest: corpus is empty");
  }
  auto tweets = process(records);
  if (!config.merge.empty()) {
    tweets = merge_labels(std::move(tweets), merge_mapping(config));
  }

  SplitSpec spec = config.split;
  spec.seed = stage_seed(config.seed, Stage::split);
  DatasetSplit split = split_dataset(tweets, spec);
  if (config.oversample_train) {
    split.train =
        oversample(split.train, stage_seed(config.seed, Stage::oversample));
  }

  std::filesystem::create_directories(config.out_dir);
  write_processed_jsonl(split.train, processed_path(config, "train"));
  write_processed_jsonl(split.valid, processed_path(config, "valid"));
  write_processed_jsonl(split.test, processed_path(config, "test"));

  json manifest;
  manifest["schema_version"] = 1;
  manifest["seed"] = config.seed;
  manifest["split_seed"] = spec.seed;
  manifest["ratios"] = {spec.train, spec.valid, spec.test};
  manifest["stratified"] = spec.stratified;
  manifest["oversample"] = config.oversample_train;
  json merge = json::object();
  for (const auto& [from, to] : config.merge) merge[from] = to;
  manifest["merge_labels"] = merge;
  manifest["corpus_path"] = config.corpus.string();
  manifest["corpus_hash"] = hash_file(config.corpus);
  for (const std::string part : {"train", "valid", "test"}) {
    const auto& tweets_part = part == "train" ? split.train
                              : part == "valid" ? split.valid
                                                : split.test;
    json entry;
    entry["path"] = processed_path(config, part).string();
    entry["hash"] = hash_file(processed_path(config, part));
    entry["count"] = tweets_part.size();
    entry["class_counts"] = class_count_json(tweets_part);
    manifest["parts"][part] = entry;
  }
  write_file(ingest_manifest_path(config), manifest.dump(2) + "\n");
}

namespace {

struct LexTrainOutput {
  LexLrClassifier classifier;
  std::vector<double> epoch_losses;
  PruneReport prune;
  std::vector<std::string> all_feature_names;
  Eigen::MatrixXd features;
};

LexTrainOutput build_lex_classifier(const RunConfig& config,
                                    const std::vector<ProcessedTweet>& train) {
  if (config.lexicon.empty()) {
    throw std::runtime_error("train lex: no lexicon path configured");
  }
  Lexicon lexicon = parse_lexicon(config.lexicon);
  Eigen::MatrixXd features = extract_feature_matrix(train, lexicon);
  Scaler scaler = fit_scaler(features);
  Eigen::MatrixXd standardized = apply_scaler(scaler, features);
  PruneReport prune = prune_correlated(standardized);

  auto names = feature_names(lexicon);
  std::vector<std::string> kept_names;
  kept_names.reserve(prune.kept.size());
  for (int k : prune.kept) {
    kept_names.push_back(names[static_cast<std::size_t>(k)]);
  }

  LogRegConfig lr_config = config.lex_train;
  lr_config.seed = stage_seed(config.seed, Stage::lex);
  LogRegFit fit =
      fit_logreg(select_columns(standardized, prune.kept), gold_labels(train),
                 lr_config, class_name_vector(), kept_names);

  return {LexLrClassifier(std::move(lexicon), std::move(scaler), prune.kept,
                          std::move(fit.model)),
          std::move(fit.epoch_losses), std::move(prune), std::move(names),
          std::move(features)};
}

NgramFit build_ngram_classifier(const RunConfig& config,
                                const std::vector<ProcessedTweet>& train) {
  NgramTrainConfig ngram_config = config.ngram_train;
  ngram_config.seed = stage_seed(config.seed, Stage::ngram);
  return fit_ngram(train, ngram_config);
}

BiLstmFit build_rnn_classifier(const RunConfig& config,
                               const std::vector<ProcessedTweet>& train) {
  auto vocab = build_rnn_vocab(train);
  EmbeddingTable embeddings =
      config.embeddings.empty()
          ? random_embeddings(std::move(vocab), config.rnn_embedding_dim,
                              stage_seed(config.seed, Stage::embed))
          : load_embeddings(config.embeddings, std::move(vocab),
                            stage_seed(config.seed, Stage::embed));
  BiLstmConfig rnn_config = config.rnn_train;
  rnn_config.seed = stage_seed(config.seed, Stage::rnn);
  return fit_bilstm(train, rnn_config, std::move(embeddings));
}

void train_lex(const RunConfig& config, const std::string& ingest_hash) {
  auto train = read_processed_jsonl(processed_path(config, "train"));
  LexTrainOutput out = build_lex_classifier(config, train);
  out.classifier.save(model_path(config, "lex"), ingest_hash);
  write_loss_log(out.epoch_losses, config.out_dir / "train_lex_log.tsv");
  write_feature_csv(config.out_dir / "lex_features_train.csv",
                    out.all_feature_names, out.features);

  std::ostringstream pruned;
  pruned << "dropped\tagainst\tcorrelation\n";
  char buf[32];
  for (const auto& d : out.prune.dropped) {
    std::snprintf(buf, sizeof(buf), "%.6f", d.correlation);
    pruned << out.all_feature_names[static_cast<std::size_t>(d.feature)] << "\t"
           << out.all_feature_names[static_cast<std::size_t>(d.against)] << "\t"
           << buf << "\n";
  }
  write_file(config.out_dir / "lex_pruned_features.tsv", pruned.str());
}

void train_ngram_model(const RunConfig& config, const std::string& ingest_hash) {
  auto train = read_processed_jsonl(processed_path(config, "train"));
  NgramFit fit = build_ngram_classifier(config, train);
  save_ngram(fit.model, model_path(config, "ngram"), ingest_hash);
  write_loss_log(fit.epoch_losses, config.out_dir / "train_ngram_log.tsv");
}

void train_rnn(const RunConfig& config, const std::string& ingest_hash) {
  auto train = read_processed_jsonl(processed_path(config, "train"));
  BiLstmFit fit = build_rnn_classifier(config, train);
  save_bilstm(fit.model, model_path(config, "rnn"), ingest_hash);
  write_loss_log(fit.epoch_losses, config.out_dir / "train_rnn_log.tsv");
}

std::array<BaseFactory, kNumBaseModels> pipeline_base_factories(
    const RunConfig& config) {
  BaseFactory lex = [config](const std::vector<ProcessedTweet>& train)
      -> std::shared_ptr<const TweetClassifier> {
    return std::make_shared<LexLrClassifier>(
        build_lex_classifier(config, train).classifier);
  };
  BaseFactory ngram = [config](const std::vector<ProcessedTweet>& train)
      -> std::shared_ptr<const TweetClassifier> {
    return std::make_shared<NgramClassifier>(
        build_ngram_classifier(config, train).model);
  };
  BaseFactory rnn = [config](const std::vector<ProcessedTweet>& train)
      -> std::shared_ptr<const TweetClassifier> {
    return std::make_shared<BiLstmClassifier>(
        build_rnn_classifier(config, train).model);
  };
  return {std::move(lex), std::move(ngram), std::move(rnn)};
}

BaseModels load_base_models(const RunConfig& config,
                            const std::string& current_hash) {
  BaseModels bases;
  std::string hash;

  auto lex_path = model_path(config, "lex");
  bases[0] = std::make_shared<LexLrClassifier>(
      LexLrClassifier::load(lex_path, &hash));
  require_fresh(hash, current_hash, lex_path);

  auto ngram_path = model_path(config, "ngram");
  bases[1] = std::make_shared<NgramClassifier>(load_ngram(ngram_path, &hash));
  require_fresh(hash, current_hash, ngram_path);

  auto rnn_path = model_path(config, "rnn");
  bases[2] = std::make_shared<BiLstmClassifier>(load_bilstm(rnn_path, &hash));
  require_fresh(hash, current_hash, rnn_path);
  return bases;
}

}  // namespace

void cmd_train(const RunConfig& config, const std::string& which) {
  const std::string ingest_hash = current_ingest_hash(config);
  if (which == "lex") {
    train_lex(config, ingest_hash);
  } else if (which == "ngram") {
    train_ngram_model(config, ingest_hash);
  } else if (which == "rnn") {
    train_rnn(config, ingest_hash);
  } else {
    throw std::runtime_error("unknown model \"" + which +
                             "\" (expected lex|ngram|rnn)");
  }
}

void cmd_stack(const RunConfig& config) {
  const std::string current_hash = current_ingest_hash(config);
  BaseModels bases = load_base_models(config, current_hash);
  DatasetSplit split = load_processed_split(config);

  MetaConfig meta_config = config.meta_train;
  meta_config.seed = stage_seed(config.seed, Stage::meta);
  StackedFit fit =
      meta_config.oof_folds >= 2
          ? fit_meta_oof(bases, pipeline_base_factories(config), split,
                         meta_config)
          : fit_meta(bases, split, meta_config);

  auto meta_path = model_path(config, "meta");
  save_meta_model(fit.model.meta, meta_path, current_hash);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["ingest_hash"] = current_hash;
  manifest["chosen_l2"] = fit.chosen_l2;
  manifest["valid_accuracy"] = fit.valid_accuracy;
  json base_list = json::array();
  for (const std::string which : {"lex", "ngram", "rnn"}) {
    json entry;
    entry["kind"] = which;
    entry["path"] = model_path(config, which).string();
    entry["hash"] = hash_file(model_path(config, which));
    base_list.push_back(entry);
  }
  manifest["bases"] = base_list;
  manifest["meta"] = {{"path", meta_path.string()},
                      {"hash", hash_file(meta_path)}};
  write_file(stacked_manifest_path(config), manifest.dump(2) + "\n");
}

void cmd_evaluate(const RunConfig& config, const std::string& which) {
  const std::string current_hash = current_ingest_hash(config);
  DatasetSplit split = load_processed_split(config);
  const auto& test = split.test;
  if (test.empty()) throw std::runtime_error("evaluate: empty test split");

  EvalReport report;
  report.run_meta.emplace_back("seed", std::to_string(config.seed));
  report.run_meta.emplace_back("ingest_hash", current_hash);
  report.run_meta.emplace_back("test_count", std::to_string(test.size()));

  if (which == "lex" || which == "ngram" || which == "rnn") {
    std::string hash;
    auto path = model_path(config, which);
    std::shared_ptr<TweetClassifier> classifier;
    if (which == "lex") {
      classifier =
          std::make_shared<LexLrClassifier>(LexLrClassifier::load(path, &hash));
    } else if (which == "ngram") {
      classifier = std::make_shared<NgramClassifier>(load_ngram(path, &hash));
    } else {
      classifier = std::make_shared<BiLstmClassifier>(load_bilstm(path, &hash));
    }
    require_fresh(hash, current_hash, path);
    report.run_meta.emplace_back("model_" + which + "_hash", hash_file(path));
    report.models.push_back(evaluate_classifier(*classifier, test));
  } else if (which == "stacked") {
    json manifest;
    try {
      manifest = json::parse(read_file(stacked_manifest_path(config)));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("evaluate stacked: ") + e.what());
    }
    if (manifest.at("ingest_hash").get<std::string>() != current_hash) {
      throw std::runtime_error("stale stacked manifest (rerun `stack`)");
    }
    for (const auto& entry : manifest.at("bases")) {
      const auto path = entry.at("path").get<std::string>();
      if (hash_file(path) != entry.at("hash").get<std::string>()) {
        throw std::runtime_error("stale base model " + path +
                                 " (hash mismatch with stacked manifest)");
      }
    }
    BaseModels bases = load_base_models(config, current_hash);
    StackedModel stacked;
    stacked.bases = bases;
    std::string meta_hash;
    stacked.meta = load_meta_model(model_path(config, "meta"), &meta_hash);
    require_fresh(meta_hash, current_hash, model_path(config, "meta"));

    for (const auto& base : bases) {
      report.models.push_back(evaluate_classifier(*base, test));
    }
    ModelEval stacked_eval;
    stacked_eval.name = "stacked";
    std::vector<int> preds;
    preds.reserve(test.size());
    for (const auto& tweet : test) {
      preds.push_back(stacked_predict(stacked, tweet).label);
    }
    std::vector<int> golds = gold_labels(test);
    stacked_eval.accuracy = accuracy(preds, golds);
    stacked_eval.confusion = confusion(preds, golds, class_name_vector());
    stacked_eval.prf = precision_recall_f1(stacked_eval.confusion);
    report.models.push_back(std::move(stacked_eval));
  } else {
    throw std::runtime_error("unknown evaluation target \"" + which +
                             "\" (expected lex|ngram|rnn|stacked)");
  }

  emit_report(report, config.out_dir / ("report_" + which + ".txt"));
  for (const auto& model : report.models) {
    emit_heatmap_svg(row_normalize(model.confusion),
                     model.confusion.class_names,
                     "Confusion fractions: " + model.name,
                     config.out_dir / ("confusion_" + model.name + ".svg"));
  }
}

void cmd_tsne(const RunConfig& config) {
  const std::string current_hash = current_ingest_hash(config);
  std::string hash;
  auto ngram_path = model_path(config, "ngram");
  NgramModel model = load_ngram(ngram_path, &hash);
  require_fresh(hash, current_hash, ngram_path);

  auto test = read_processed_jsonl(processed_path(config, "test"));
  if (test.empty()) throw std::runtime_error("tsne: empty test split");

  Rng rng(stage_seed(config.seed, Stage::tsne));
  std::vector<std::size_t> order(test.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.tsne_sample, 0)),
                            test.size());
  order.resize(take);

  Eigen::MatrixXd points(static_cast<Eigen::Index>(take), model.dim());
  std::vector<int> labels(take);
  std::vector<std::string> ids(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& tweet = test[order[i]];
    points.row(static_cast<Eigen::Index>(i)) =
        sentence_embedding(model, tweet.tokens).transpose();
    labels[i] = static_cast<int>(tweet.label);
    ids[i] = tweet.id;
  }

  TsneConfig tsne_config = config.tsne_config;
  tsne_config.seed = stage_seed(config.seed, Stage::tsne);
  Projection2D projection = tsne(points, labels, tsne_config);

  write_projection_csv(projection, ids, class_name_vector(),
                       config.out_dir / "tsne_coords.csv");
  emit_scatter_svg(projection, class_name_vector(),
                   "Sentence embeddings (t-SNE)",
                   config.out_dir / "tsne.svg");
}

void cmd_inspect_coef(const RunConfig& config, const std::string& class_name,
                      int k, std::ostream& out) {
  std::string hash;
  auto classifier = LexLrClassifier::load(model_path(config, "lex"), &hash);
  char buf[32];
  for (const auto& [feature, weight] :
       top_coefficients(classifier.model(), class_name, k)) {
    std::snprintf(buf, sizeof(buf), "%.6f", weight);
    out << feature << "\t" << buf << "\n";
  }
}

void cmd_inspect_neighbors(const RunConfig& config, const std::string& word,
                           int k, std::ostream& out) {
  NgramModel model = load_ngram(model_path(config, "ngram"));
  char buf[32];
  for (const auto& [neighbor, cosine] : nearest_neighbors(model, word, k)) {
    std::snprintf(buf, sizeof(buf), "%.6f", cosine);
    out << neighbor << "\t" << buf << "\n";
  }
}

void cmd_inspect_analogy(const RunConfig& config, const std::string& a,
                         const std::string& b, const std::string& c, int k,
                         std::ostream& out) {
  NgramModel model = load_ngram(model_path(config, "ngram"));
  char buf[32];
  for (const auto& [word, cosine] : analogy(model, a, b, c, k)) {
    std::snprintf(buf, sizeof(buf), "%.6f", cosine);
    out << word << "\t" << buf << "\n";
  }
}

void cmd_inspect_attention(const RunConfig& config, int k, std::ostream& out) {
  BiLstmModel model = load_bilstm(model_path(config, "rnn"));
  DatasetSplit split = load_processed_split(config);
  AttentionTableOptions options;
  options.min_count = config.attention_min_count;
  options.top_k = k;
  auto tables = classwise_attention(model, split, options);
  char buf[32];
  for (int c = 0; c < kNumClasses; ++c) {
    for (const auto& row : tables[static_cast<std::size_t>(c)]) {
      std::snprintf(buf, sizeof(buf), "%.6f", row.mean_attention);
      out << kClassNames[static_cast<std::size_t>(c)] << "\t" << row.word
          << "\t" << buf << "\t" << row.count << "\n";
    }
  }
}

}  // namespace textstack
