// SPDX-License-Identifier: Apache-2.0
#include "textstack/classifier.hpp"

#include <stdexcept>

#include "textstack/io.hpp"

namespace textstack {

LexLrClassifier::LexLrClassifier(Lexicon lexicon, Scaler scaler,
                                 std::vector<int> kept, LogRegModel model)
    : lexicon_(std::move(lexicon)),
      scaler_(std::move(scaler)),
      kept_(std::move(kept)),
      model_(std::move(model)) {
  if (static_cast<Eigen::Index>(kept_.size()) != model_.weights.cols()) {
    throw std::runtime_error(
        "kept feature count does not match model dimension");
  }
}

Eigen::VectorXd LexLrClassifier::predict_proba(
    const ProcessedTweet& tweet) const {
  Eigen::VectorXd features = extract_features(tweet.tokens, lexicon_);
  Eigen::VectorXd scaled = apply_scaler(scaler_, features);
  return textstack::predict_proba(model_, select_entries(scaled, kept_));
}

void LexLrClassifier::save(const std::filesystem::path& path,
                           const std::string& ingest_hash) const {
  BinaryWriter out(path);
  out.str(kModelMagic);
  out.u32(static_cast<std::uint32_t>(ModelKind::lex_lr));
  out.str(ingest_hash);

  out.u64(lexicon_.categories().size());
  for (const auto& cat : lexicon_.categories()) {
    out.u32(static_cast<std::uint32_t>(cat.id));
    out.str(cat.name);
  }
  out.u64(lexicon_.entries().size());
  for (const auto& entry : lexicon_.entries()) {
    out.str(entry.pattern);
    out.u64(entry.category_ids.size());
    for (int id : entry.category_ids) out.u32(static_cast<std::uint32_t>(id));
  }

  out.vec(scaler_.mean);
  out.vec(scaler_.stddev);
  out.u64(kept_.size());
  for (int k : kept_) out.u32(static_cast<std::uint32_t>(k));
  save_logreg(model_, out);
  out.close();
}

LexLrClassifier LexLrClassifier::load(const std::filesystem::path& path,
                                      std::string* ingest_hash) {
  BinaryReader in(path);
  if (in.str() != kModelMagic) {
    throw std::runtime_error("not a model file: " + path.string());
  }
  if (in.u32() != static_cast<std::uint32_t>(ModelKind::lex_lr)) {
    throw std::runtime_error("not a lexicon-LR model: " + path.string());
  }
  std::string hash = in.str();
  if (ingest_hash) *ingest_hash = hash;

  std::vector<Lexicon::Category> categories(in.u64());
  for (auto& cat : categories) {
    cat.id = static_cast<int>(in.u32());
    cat.name = in.str();
  }
  std::vector<Lexicon::Entry> entries(in.u64());
  for (auto& entry : entries) {
    entry.pattern = in.str();
    entry.category_ids.resize(in.u64());
    for (auto& id : entry.category_ids) id = static_cast<int>(in.u32());
  }

  Scaler scaler;
  scaler.mean = in.vec();
  scaler.stddev = in.vec();
  scaler.constant.resize(static_cast<std::size_t>(scaler.stddev.size()));
  for (Eigen::Index i = 0; i < scaler.stddev.size(); ++i) {
    scaler.constant[static_cast<std::size_t>(i)] = scaler.stddev[i] == 0.0;
  }
  std::vector<int> kept(in.u64());
  for (auto& k : kept) k = static_cast<int>(in.u32());
  LogRegModel model = load_logreg(in);

  return LexLrClassifier(Lexicon(std::move(categories), std::move(entries)),
                         std::move(scaler), std::move(kept), std::move(model));
}

}  // namespace textstack
