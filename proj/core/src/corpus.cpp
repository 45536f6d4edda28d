// SPDX-License-Identifier: Apache-2.0
#include "textstack/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "textstack/rng.hpp"

namespace textstack {

std::string_view to_string(Label label) {
  return kClassNames[static_cast<std::size_t>(label)];
}

Label label_from_string(std::string_view s) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (s == kClassNames[static_cast<std::size_t>(i)]) {
      return static_cast<Label>(i);
    }
  }
  throw std::runtime_error("unknown label \"" + std::string(s) +
                           "\" (expected normal|spam|abusive|hateful)");
}

CorpusFormat corpus_format_from_string(std::string_view s) {
  if (s == "csv") return CorpusFormat::csv;
  if (s == "tsv") return CorpusFormat::tsv;
  if (s == "jsonl") return CorpusFormat::jsonl;
  throw std::runtime_error("unknown corpus format \"" + std::string(s) + "\"");
}

CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".csv") return CorpusFormat::csv;
  if (ext == ".tsv") return CorpusFormat::tsv;
  if (ext == ".jsonl") return CorpusFormat::jsonl;
  throw std::runtime_error("cannot infer corpus format from extension of " +
                           path.string());
}

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " +
                           what);
}

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // physical line number where the row starts
};

// RFC-4180 style parser; quoted fields may contain the separator, doubled
// quotes, and newlines.
std::vector<CsvRow> parse_delimited(const std::string& content, char sep,
                                    bool quoted,
                                    const std::filesystem::path& path) {
  std::vector<CsvRow> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool in_quotes = false;
    bool row_done = false;
    while (i < n && !row_done) {
      char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
      } else if (quoted && c == '"' && field.empty()) {
        in_quotes = true;
        ++i;
      } else if (c == sep) {
        row.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && i + 1 < n && content[i + 1] == '\n') ++i;
        ++i;
        ++line;
        row_done = true;
      } else {
        field.push_back(c);
        ++i;
      }
    }
    if (in_quotes) parse_fail(path, row.line, "unterminated quoted field");
    row.fields.push_back(std::move(field));
    // Skip rows that are entirely empty (e.g. a trailing newline).
    if (!(row.fields.size() == 1 && row.fields[0].empty())) {
      rows.push_back(std::move(row));
    }
    if (!row_done) break;
  }
  return rows;
}

std::vector<RawRecord> load_delimited(const std::filesystem::path& path,
                                      char sep, bool quoted) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto rows = parse_delimited(ss.str(), sep, quoted, path);
  if (rows.empty()) {
    throw std::runtime_error(path.string() + ": missing header row");
  }
  const auto& header = rows.front().fields;
  if (header.size() != 3 || header[0] != "id" || header[1] != "text" ||
      header[2] != "label") {
    parse_fail(path, rows.front().line,
               "expected header \"id,text,label\"");
  }
  std::vector<RawRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3) {
      parse_fail(path, row.line,
                 "expected 3 fields, got " + std::to_string(row.fields.size()));
    }
    RawRecord rec;
    rec.id = row.fields[0];
    rec.text = row.fields[1];
    try {
      rec.label = label_from_string(row.fields[2]);
    } catch (const std::exception& e) {
      parse_fail(path, row.line, e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path.string());
  std::vector<RawRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      parse_fail(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    for (const char* key : {"id", "text", "label"}) {
      if (!obj.contains(key) || !obj[key].is_string()) {
        parse_fail(path, lineno,
                   std::string("missing or non-string key \"") + key + "\"");
      }
    }
    RawRecord rec;
    rec.id = obj["id"].get<std::string>();
    rec.text = obj["text"].get<std::string>();
    try {
      rec.label = label_from_string(obj["label"].get<std::string>());
    } catch (const std::exception& e) {
      parse_fail(path, lineno, e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::vector<RawRecord> load_corpus(const std::filesystem::path& path,
                                   CorpusFormat format) {
  switch (format) {
    case CorpusFormat::csv:
      return load_delimited(path, ',', true);
    case CorpusFormat::tsv:
      return load_delimited(path, '\t', false);
    case CorpusFormat::jsonl:
      return load_jsonl(path);
  }
  throw std::runtime_error("unreachable corpus format");
}

bool is_retained_punct(char c) {
  return kRetainedPunct.find(c) != std::string_view::npos;
}

bool is_sentinel_token(std::string_view token) {
  return token == kUserTagToken || token == kWebLinkToken;
}

bool is_punct_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    if (!is_retained_punct(c)) return false;
  }
  return true;
}

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_kept_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         is_retained_punct(c);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

// Rule chain for one whitespace-delimited piece, iterated to a fixpoint so
// the whole normalization is idempotent (stripping leading junk can expose a
// "www." prefix that must still collapse to web_link).
std::string normalize_piece(std::string piece) {
  for (;;) {
    if (is_sentinel_token(piece)) return piece;
    if (starts_with(piece, "http://") || starts_with(piece, "https://") ||
        starts_with(piece, "www.")) {
      return std::string(kWebLinkToken);
    }
    if (piece.size() >= 2 && piece[0] == '@' && is_word_char(piece[1])) {
      return std::string(kUserTagToken);
    }
    std::string filtered;
    filtered.reserve(piece.size());
    for (char c : piece) {
      if (is_kept_char(c)) filtered.push_back(c);
    }
    if (filtered == piece) return piece;
    piece = std::move(filtered);
  }
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string lowered(text);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  std::string out;
  out.reserve(lowered.size());
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_ascii_space(lowered[i])) ++i;
    std::size_t start = i;
    while (i < lowered.size() && !is_ascii_space(lowered[i])) ++i;
    if (i == start) break;
    std::string piece = normalize_piece(lowered.substr(start, i - start));
    if (piece.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += piece;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && normalized[i] == ' ') ++i;
    std::size_t start = i;
    while (i < normalized.size() && normalized[i] != ' ') ++i;
    if (i == start) break;
    std::string_view piece = normalized.substr(start, i - start);
    if (is_sentinel_token(piece)) {
      tokens.emplace_back(piece);
      continue;
    }
    std::size_t j = 0;
    while (j < piece.size()) {
      bool punct = is_retained_punct(piece[j]);
      std::size_t run = j;
      while (run < piece.size() && is_retained_punct(piece[run]) == punct) {
        ++run;
      }
      tokens.emplace_back(piece.substr(j, run - j));
      j = run;
    }
  }
  return tokens;
}

ProcessedTweet process(const RawRecord& record) {
  ProcessedTweet tweet;
  tweet.id = record.id;
  tweet.label = record.label;
  tweet.tokens = tokenize(normalize(record.text));
  return tweet;
}

std::vector<ProcessedTweet> process(const std::vector<RawRecord>& records) {
  std::vector<ProcessedTweet> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(process(r));
  return out;
}

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(valid > 0.0) || !(test > 0.0)) {
    throw std::runtime_error("split ratios must be strictly positive");
  }
  if (std::abs(train + valid + test - 1.0) > 1e-9) {
    throw std::runtime_error("split ratios must sum to 1.0");
  }
}

std::array<std::size_t, 3> allocate_parts(std::size_t n,
                                          const SplitSpec& spec) {
  const double ratios[3] = {spec.train, spec.valid, spec.test};
  std::array<std::size_t, 3> counts{};
  double remainders[3];
  std::size_t assigned = 0;
  for (int p = 0; p < 3; ++p) {
    double quota = ratios[p] * static_cast<double>(n);
    counts[static_cast<std::size_t>(p)] =
        static_cast<std::size_t>(std::floor(quota));
    remainders[p] = quota - std::floor(quota);
    assigned += counts[static_cast<std::size_t>(p)];
  }
  while (assigned < n) {
    int best = 0;
    for (int p = 1; p < 3; ++p) {
      if (remainders[p] > remainders[best]) best = p;
    }
    counts[static_cast<std::size_t>(best)] += 1;
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

DatasetSplit split_dataset(const std::vector<ProcessedTweet>& records,
                           const SplitSpec& spec) {
  spec.validate();
  if (records.empty()) {
    throw std::runtime_error("split_dataset: empty record list");
  }

  DatasetSplit result;
  result.spec = spec;
  Rng rng(spec.seed);

  auto distribute = [&](std::vector<std::size_t> indices) {
    rng.shuffle(indices);
    auto counts = allocate_parts(indices.size(), spec);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < counts[0]; ++k)
      result.train.push_back(records[indices[pos++]]);
    for (std::size_t k = 0; k < counts[1]; ++k)
      result.valid.push_back(records[indices[pos++]]);
    for (std::size_t k = 0; k < counts[2]; ++k)
      result.test.push_back(records[indices[pos++]]);
  };

  if (spec.stratified) {
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) {
      by_class[static_cast<std::size_t>(records[i].label)].push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& members = by_class[static_cast<std::size_t>(c)];
      if (members.empty()) continue;
      if (members.size() < 3) {
        throw std::runtime_error(
            "split_dataset: class \"" +
            std::string(kClassNames[static_cast<std::size_t>(c)]) + "\" has " +
            std::to_string(members.size()) +
            " records, fewer than the 3 split parts");
      }
      distribute(members);
    }
  } else {
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    distribute(std::move(all));
  }
  return result;
}

std::vector<ProcessedTweet> oversample(
    const std::vector<ProcessedTweet>& train, std::uint64_t seed) {
  if (train.empty()) {
    throw std::runtime_error("oversample: empty training set");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) {
    by_class[static_cast<std::size_t>(train[i].label)].push_back(i);
  }
  std::size_t majority = 0;
  for (const auto& members : by_class) {
    majority = std::max(majority, members.size());
  }

  std::vector<ProcessedTweet> out = train;
  Rng rng(seed);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.empty()) continue;
    for (std::size_t k = members.size(); k < majority; ++k) {
      std::size_t pick = static_cast<std::size_t>(rng.below(members.size()));
      out.push_back(train[members[pick]]);
    }
  }
  return out;
}

std::vector<ProcessedTweet> merge_labels(
    std::vector<ProcessedTweet> records,
    const std::array<Label, kNumClasses>& mapping) {
  for (auto& r : records) {
    r.label = mapping[static_cast<std::size_t>(r.label)];
  }
  return records;
}

}  // namespace textstack
