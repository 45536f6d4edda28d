// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "textstack/types.hpp"

namespace textstack {

enum class CorpusFormat { csv, tsv, jsonl };

CorpusFormat corpus_format_from_string(std::string_view s);

/// Guess the format from the file extension (.csv/.tsv/.jsonl).
CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

/// Loads one RawRecord per row/line, order preserved. CSV follows RFC-4180
/// quoting (quoted fields may contain commas, quotes, and newlines); TSV is
/// plain tab-separated with no quoting. Parse and label errors name the line.
std::vector<RawRecord> load_corpus(const std::filesystem::path& path,
                                   CorpusFormat format);

inline constexpr std::string_view kUserTagToken = "user_tag";
inline constexpr std::string_view kWebLinkToken = "web_link";

/// Punctuation characters that survive normalization.
inline constexpr std::string_view kRetainedPunct = ".,!?'\":;()-";

bool is_retained_punct(char c);
bool is_sentinel_token(std::string_view token);
bool is_punct_token(std::string_view token);

/// Lowercases, replaces URLs with web_link and @mentions with user_tag,
/// drops '#' while keeping the tag word, strips every character outside
/// {a-z, 0-9, space, retained punctuation}, and collapses whitespace.
/// Total and idempotent.
std::string normalize(std::string_view text);

/// Whitespace split, then each maximal punctuation run detached as its own
/// token. Sentinel tokens are never split. Input must be normalized.
std::vector<std::string> tokenize(std::string_view normalized);

ProcessedTweet process(const RawRecord& record);
std::vector<ProcessedTweet> process(const std::vector<RawRecord>& records);

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
  bool stratified = true;

  /// Ratios must be strictly positive and sum to 1 within 1e-9.
  void validate() const;
};

struct DatasetSplit {
  std::vector<ProcessedTweet> train;
  std::vector<ProcessedTweet> valid;
  std::vector<ProcessedTweet> test;
  SplitSpec spec;
};

/// Deterministic per seed. Stratified mode keeps each class's proportion in
/// each part within one record per class and requires at least 3 records
/// (one per part) in every present class.
DatasetSplit split_dataset(const std::vector<ProcessedTweet>& records,
                           const SplitSpec& spec);

/// Duplicates minority-class records uniformly with replacement until every
/// present class matches the majority count. Deterministic per seed.
std::vector<ProcessedTweet> oversample(
    const std::vector<ProcessedTweet>& train, std::uint64_t seed);

/// mapping[i] is the destination class for class i.
std::vector<ProcessedTweet> merge_labels(
    std::vector<ProcessedTweet> records,
    const std::array<Label, kNumClasses>& mapping);

/// Largest-remainder allocation of n items to the given ratios; remainders
/// tie-break toward the lower part index.
std::array<std::size_t, 3> allocate_parts(std::size_t n,
                                          const SplitSpec& spec);

}  // namespace textstack
