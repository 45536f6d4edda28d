// SPDX-License-Identifier: Apache-2.0
#include "textstack/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "textstack/corpus.hpp"
#include "textstack/io.hpp"

namespace textstack {

Lexicon::Lexicon(std::vector<Category> categories, std::vector<Entry> entries)
    : categories_(std::move(categories)), entries_(std::move(entries)) {
  build_index();
}

void Lexicon::build_index() {
  id_to_position_.clear();
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    auto [it, inserted] =
        id_to_position_.emplace(categories_[i].id, static_cast<int>(i));
    if (!inserted) {
      throw std::runtime_error("duplicate category id " +
                               std::to_string(categories_[i].id));
    }
  }
  literal_.clear();
  stem_.clear();
  max_stem_len_ = 0;
  for (const auto& entry : entries_) {
    if (entry.pattern.empty()) {
      throw std::runtime_error("empty lexicon pattern");
    }
    std::vector<int> positions;
    for (int id : entry.category_ids) {
      auto it = id_to_position_.find(id);
      if (it == id_to_position_.end()) {
        throw std::runtime_error("entry \"" + entry.pattern +
                                 "\" references undeclared category id " +
                                 std::to_string(id));
      }
      positions.push_back(it->second);
    }
    if (entry.pattern.back() == '*') {
      std::string body = entry.pattern.substr(0, entry.pattern.size() - 1);
      if (body.empty()) {
        throw std::runtime_error("stem pattern \"*\" has an empty body");
      }
      auto& slot = stem_[body];
      slot.insert(slot.end(), positions.begin(), positions.end());
      max_stem_len_ = std::max(max_stem_len_, body.size());
    } else {
      auto& slot = literal_[entry.pattern];
      slot.insert(slot.end(), positions.begin(), positions.end());
    }
  }
}

std::vector<int> Lexicon::match(const std::string& token) const {
  std::vector<int> hits;
  if (auto it = literal_.find(token); it != literal_.end()) {
    hits.insert(hits.end(), it->second.begin(), it->second.end());
  }
  std::size_t max_len = std::min(max_stem_len_, token.size());
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (auto it = stem_.find(token.substr(0, len)); it != stem_.end()) {
      hits.insert(hits.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

int Lexicon::category_position(int category_id) const {
  auto it = id_to_position_.find(category_id);
  return it == id_to_position_.end() ? -1 : it->second;
}

namespace {

std::string lowercase_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string field;
  while (ss >> field) fields.push_back(field);
  return fields;
}

}  // namespace

Lexicon parse_lexicon_text(const std::string& content,
                           const std::string& source_name) {
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw std::runtime_error(source_name + ":" + std::to_string(lineno) +
                             ": " + what);
  };

  enum class State { before_header, in_header, entries };
  State state = State::before_header;
  std::vector<Lexicon::Category> categories;
  std::vector<Lexicon::Entry> entries;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
      trimmed.pop_back();
    }
    if (trimmed.empty()) continue;

    if (trimmed == "%") {
      if (state == State::before_header) {
        state = State::in_header;
      } else if (state == State::in_header) {
        state = State::entries;
      } else {
        fail("unexpected '%' after header section");
      }
      continue;
    }

    auto fields = split_ws(trimmed);
    switch (state) {
      case State::before_header:
        fail("expected '%' header line before category declarations");
        break;
      case State::in_header: {
        if (fields.size() < 2) fail("malformed category line (need id and name)");
        Lexicon::Category cat;
        try {
          cat.id = std::stoi(fields[0]);
        } catch (...) {
          fail("category id \"" + fields[0] + "\" is not an integer");
        }
        cat.name = fields[1];
        categories.push_back(std::move(cat));
        break;
      }
      case State::entries: {
        if (fields.size() < 2) fail("entry \"" + trimmed + "\" has no category ids");
        Lexicon::Entry entry;
        entry.pattern = lowercase_ascii(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
          try {
            entry.category_ids.push_back(std::stoi(fields[i]));
          } catch (...) {
            fail("entry \"" + entry.pattern + "\" has non-integer category id \"" +
                 fields[i] + "\"");
          }
        }
        entries.push_back(std::move(entry));
        break;
      }
    }
  }
  if (state != State::entries) {
    throw std::runtime_error(source_name +
                             ": malformed header (missing '%' delimiters)");
  }
  try {
    return Lexicon(std::move(categories), std::move(entries));
  } catch (const std::exception& e) {
    throw std::runtime_error(source_name + ": " + e.what());
  }
}

Lexicon parse_lexicon(const std::filesystem::path& path) {
  return parse_lexicon_text(read_file(path), path.string());
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "%\n";
  for (const auto& cat : lexicon.categories()) {
    out << cat.id << "\t" << cat.name << "\n";
  }
  out << "%\n";
  for (const auto& entry : lexicon.entries()) {
    out << entry.pattern;
    for (int id : entry.category_ids) out << "\t" << id;
    out << "\n";
  }
  write_file(path, out.str());
}

std::vector<std::string> feature_names(const Lexicon& lexicon) {
  std::vector<std::string> names = {"word_count", "words_per_sentence", "dic",
                                    "punct_pct"};
  for (const auto& cat : lexicon.categories()) names.push_back(cat.name);
  return names;
}

Eigen::VectorXd extract_features(const std::vector<std::string>& tokens,
                                 const Lexicon& lexicon) {
  const auto n_categories = static_cast<Eigen::Index>(lexicon.categories().size());
  Eigen::VectorXd features =
      Eigen::VectorXd::Zero(kStructuralFeatureCount + n_categories);

  std::size_t word_count = 0;
  std::size_t punct_count = 0;
  std::size_t terminator_tokens = 0;
  std::size_t dic_count = 0;
  std::vector<std::size_t> category_counts(lexicon.categories().size(), 0);

  for (const auto& token : tokens) {
    if (is_punct_token(token)) {
      ++punct_count;
      if (token.find_first_of(".!?") != std::string::npos) {
        ++terminator_tokens;
      }
      continue;
    }
    ++word_count;
    auto matches = lexicon.match(token);
    if (!matches.empty()) ++dic_count;
    for (int pos : matches) ++category_counts[static_cast<std::size_t>(pos)];
  }

  const std::size_t total = tokens.size();
  const std::size_t sentences = terminator_tokens == 0 ? 1 : terminator_tokens;

  features[0] = static_cast<double>(word_count);
  features[1] = static_cast<double>(word_count) / static_cast<double>(sentences);
  if (word_count > 0) {
    features[2] = 100.0 * static_cast<double>(dic_count) /
                  static_cast<double>(word_count);
  }
  if (total > 0) {
    features[3] = 100.0 * static_cast<double>(punct_count) /
                  static_cast<double>(total);
  }
  for (Eigen::Index c = 0; c < n_categories; ++c) {
    if (word_count > 0) {
      features[kStructuralFeatureCount + c] =
          100.0 * static_cast<double>(category_counts[static_cast<std::size_t>(c)]) /
          static_cast<double>(word_count);
    }
  }
  return features;
}

Eigen::MatrixXd extract_feature_matrix(
    const std::vector<ProcessedTweet>& tweets, const Lexicon& lexicon) {
  const auto dim = kStructuralFeatureCount +
                   static_cast<Eigen::Index>(lexicon.categories().size());
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(tweets.size()), dim);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    matrix.row(static_cast<Eigen::Index>(i)) =
        extract_features(tweets[i].tokens, lexicon).transpose();
  }
  return matrix;
}

Scaler fit_scaler(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() < 2) {
    throw std::runtime_error("fit_scaler requires at least 2 rows");
  }
  Scaler scaler;
  const auto n = static_cast<double>(matrix.rows());
  scaler.mean = matrix.colwise().mean();
  scaler.stddev.resize(matrix.cols());
  scaler.constant.resize(static_cast<std::size_t>(matrix.cols()));
  for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
    double var =
        (matrix.col(c).array() - scaler.mean[c]).square().sum() / n;
    double sd = std::sqrt(var);
    scaler.stddev[c] = sd;
    scaler.constant[static_cast<std::size_t>(c)] = (sd == 0.0);
  }
  return scaler;
}

Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& m) {
  if (m.cols() != scaler.mean.size()) {
    throw std::runtime_error("apply_scaler: column count mismatch");
  }
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (scaler.constant[static_cast<std::size_t>(c)]) {
      out.col(c).setZero();
    } else {
      out.col(c) = (m.col(c).array() - scaler.mean[c]) / scaler.stddev[c];
    }
  }
  return out;
}

Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& row) {
  if (row.size() != scaler.mean.size()) {
    throw std::runtime_error("apply_scaler: feature count mismatch");
  }
  Eigen::VectorXd out(row.size());
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    out[c] = scaler.constant[static_cast<std::size_t>(c)]
                 ? 0.0
                 : (row[c] - scaler.mean[c]) / scaler.stddev[c];
  }
  return out;
}

namespace {

// Pearson correlation between two columns; 0 if either is constant.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = static_cast<double>(a.size());
  double mean_a = a.mean();
  double mean_b = b.mean();
  Eigen::ArrayXd da = a.array() - mean_a;
  Eigen::ArrayXd db = b.array() - mean_b;
  double var_a = da.square().sum() / n;
  double var_b = db.square().sum() / n;
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  double cov = (da * db).sum() / n;
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

PruneReport prune_correlated(const Eigen::MatrixXd& matrix, double threshold) {
  if (matrix.rows() < 2) {
    throw std::runtime_error("prune_correlated requires at least 2 rows");
  }
  PruneReport report;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    bool constant = (matrix.col(j).array() - matrix(0, j)).abs().maxCoeff() == 0.0;
    bool dropped = false;
    if (!constant) {
      for (int i : report.kept) {
        double r = pearson(matrix.col(i), matrix.col(j));
        if (std::abs(r) > threshold) {
          report.dropped.push_back({static_cast<int>(j), i, r});
          dropped = true;
          break;
        }
      }
    }
    if (!dropped) {
      report.kept.push_back(static_cast<int>(j));
      if (constant) report.constant_features.push_back(static_cast<int>(j));
    }
  }
  return report;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& matrix,
                               const std::vector<int>& columns) {
  Eigen::MatrixXd out(matrix.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = matrix.col(columns[k]);
  }
  return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& row,
                               const std::vector<int>& columns) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = row[columns[k]];
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& names,
                       const Eigen::MatrixXd& matrix) {
  if (static_cast<Eigen::Index>(names.size()) != matrix.cols()) {
    throw std::runtime_error("write_feature_csv: name count mismatch");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ",";
    out << names[i];
  }
  out << "\n";
  char buf[64];
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", matrix(r, c));
      out << buf;
    }
    out << "\n";
  }
  write_file(path, out.str());
}

}  // namespace textstack
