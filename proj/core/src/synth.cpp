// SPDX-License-Identifier: Apache-2.0
#include "textstack/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "textstack/io.hpp"
#include "textstack/rng.hpp"

namespace textstack {

namespace {

// Keyword pools line up with distinctive categories of the bundled demo
// lexicon so the psycholinguistic features separate the classes too.
const std::vector<std::string> kNormalWords = {
    "coffee", "morning", "lunch",   "game",  "music", "friend", "weekend",
    "sunny",  "walk",    "movie",   "park",  "team",  "dinner", "book",
    "family", "happy",   "tonight", "beach"};
const std::vector<std::string> kSpamWords = {
    "free",     "win",  "click", "offer", "promo",     "discount",
    "deal",     "buy",  "sale",  "cash",  "subscribe", "prize",
    "giveaway", "shop"};
const std::vector<std::string> kAbusiveWords = {
    "idiot", "stupid", "moron", "jerk", "dumb", "loser", "trash", "clown"};
const std::vector<std::string> kHatefulWords = {
    "hate", "despise", "loathe", "vermin", "scum", "filth"};
const std::vector<std::string> kFillerWords = {
    "the",  "a",     "to",   "and",  "of",   "in",    "on",    "it",
    "is",   "was",   "for",  "with", "at",   "this",  "that",  "day",
    "time", "see",   "just", "now",  "you",  "i",     "we",    "they",
    "so",   "really", "going", "got", "about", "people"};
const std::vector<std::string> kPunct = {"!", "!!", "?", "...", "!?"};
const std::vector<std::string> kMentionNames = {
    "@sam_dogwood", "@alex99", "@news_flash", "@dailyposter", "@megan_t",
    "@the_real_one"};

const std::vector<std::string>& pool_for(Label label) {
  switch (label) {
    case Label::normal:
      return kNormalWords;
    case Label::spam:
      return kSpamWords;
    case Label::abusive:
      return kAbusiveWords;
    case Label::hateful:
      return kHatefulWords;
  }
  throw std::runtime_error("unreachable label");
}

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

std::string make_text(Label label, Rng& rng) {
  const auto& keywords = pool_for(label);
  const std::size_t length = 8 + rng.below(9);       // 8..16 words
  const std::size_t planted = 2 + rng.below(3);      // 2..4 keywords

  std::vector<std::string> words;
  words.reserve(length + 4);
  for (std::size_t i = 0; i < length; ++i) {
    words.push_back(pick(kFillerWords, rng));
  }
  for (std::size_t k = 0; k < planted; ++k) {
    std::string keyword = pick(keywords, rng);
    if (rng.uniform() < 0.15) keyword = "#" + keyword;
    words[static_cast<std::size_t>(rng.below(length))] = std::move(keyword);
  }
  if (rng.uniform() < 0.20) {
    words.insert(words.begin(), pick(kMentionNames, rng));
  }
  const double link_chance = label == Label::spam ? 0.5 : 0.12;
  if (rng.uniform() < link_chance) {
    words.push_back("https://t.co/" + to_hex(rng.next_u64()).substr(8));
  }
  if (rng.uniform() < 0.35) {
    words.push_back(pick(kPunct, rng));
  }

  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text.push_back(' ');
    text += words[i];
  }
  return text;
}

}  // namespace

std::vector<RawRecord> generate_synthetic_corpus(const SynthConfig& config) {
  if (config.count < kNumClasses) {
    throw std::runtime_error("synthetic corpus needs at least 4 records");
  }

  // Largest-remainder quota per class.
  std::array<std::size_t, kNumClasses> counts{};
  double remainders[kNumClasses];
  std::size_t assigned = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const double quota = kClassPriors[c] * static_cast<double>(config.count);
    counts[static_cast<std::size_t>(c)] =
        static_cast<std::size_t>(std::floor(quota));
    remainders[c] = quota - std::floor(quota);
    assigned += counts[static_cast<std::size_t>(c)];
  }
  while (assigned < static_cast<std::size_t>(config.count)) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
      if (remainders[c] > remainders[best]) best = c;
    }
    counts[static_cast<std::size_t>(best)] += 1;
    remainders[best] = -1.0;
    ++assigned;
  }

  Rng rng(config.seed);
  std::vector<RawRecord> records;
  records.reserve(static_cast<std::size_t>(config.count));
  for (int c = 0; c < kNumClasses; ++c) {
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      RawRecord rec;
      rec.label = static_cast<Label>(c);
      rec.text = make_text(rec.label, rng);
      records.push_back(std::move(rec));
    }
  }
  rng.shuffle(records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%06zu", i);
    records[i].id = buf;
  }
  return records;
}

void write_jsonl_corpus(const std::vector<RawRecord>& records,
                        const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& rec : records) {
    nlohmann::json obj;
    obj["id"] = rec.id;
    obj["text"] = rec.text;
    obj["label"] = std::string(to_string(rec.label));
    out << obj.dump() << "\n";
  }
  write_file(path, out.str());
}

}  // namespace textstack
