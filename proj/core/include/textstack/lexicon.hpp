// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "textstack/types.hpp"

namespace textstack {

/// Category dictionary in the LIWC ".dic" convention: a '%' line, then
/// "id<TAB>name" category declarations, a closing '%', then
/// "pattern<TAB>id[<TAB>id...]" entries. Patterns are literal words or stems
/// ending in '*'.
class Lexicon {
 public:
  struct Category {
    int id;
    std::string name;
  };
  struct Entry {
    std::string pattern;  // as written, including a trailing '*' for stems
    std::vector<int> category_ids;
  };

  Lexicon() = default;
  Lexicon(std::vector<Category> categories, std::vector<Entry> entries);

  const std::vector<Category>& categories() const { return categories_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Positions (into categories()) of every category matched by the token.
  /// A token matches a literal entry by equality and a stem entry when the
  /// stem body is a prefix; all matching entries fire, each category at most
  /// once per token.
  std::vector<int> match(const std::string& token) const;

  int category_position(int category_id) const;  // -1 if unknown

 private:
  void build_index();

  std::vector<Category> categories_;
  std::vector<Entry> entries_;
  std::unordered_map<int, int> id_to_position_;
  std::unordered_map<std::string, std::vector<int>> literal_;  // -> positions
  std::unordered_map<std::string, std::vector<int>> stem_;     // body -> positions
  std::size_t max_stem_len_ = 0;
};

Lexicon parse_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon_text(const std::string& content,
                           const std::string& source_name = "<string>");

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

/// Feature layout induced by a lexicon: the four structural features
/// followed by one percentage per category, in declaration order.
std::vector<std::string> feature_names(const Lexicon& lexicon);

inline constexpr int kStructuralFeatureCount = 4;  // word_count, wps, dic, punct_pct

/// Per-tweet psycholinguistic scores. Category scores and dic are
/// percentages of word tokens; punct_pct is a percentage of all tokens.
Eigen::VectorXd extract_features(const std::vector<std::string>& tokens,
                                 const Lexicon& lexicon);

Eigen::MatrixXd extract_feature_matrix(
    const std::vector<ProcessedTweet>& tweets, const Lexicon& lexicon);

/// Per-column population mean and standard deviation.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> constant;  // columns with zero variance
};

/// Requires at least 2 rows.
Scaler fit_scaler(const Eigen::MatrixXd& matrix);

/// Transformed columns have mean 0 and unit variance; constant columns map
/// to 0.
Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& m);
Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& row);

struct PruneReport {
  struct Dropped {
    int feature;       // dropped column
    int against;       // earlier kept column it correlates with
    double correlation;
  };
  std::vector<int> kept;
  std::vector<Dropped> dropped;
  std::vector<int> constant_features;  // kept but flagged
};

/// Greedy scan in feature order: column j is dropped iff |pearson(i, j)| >
/// threshold for some kept i < j. Constant columns correlate with nothing
/// and are kept, flagged.
PruneReport prune_correlated(const Eigen::MatrixXd& matrix,
                             double threshold = 0.9);

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& matrix,
                               const std::vector<int>& columns);
Eigen::VectorXd select_entries(const Eigen::VectorXd& row,
                               const std::vector<int>& columns);

/// CSV with header = feature names, one row per input row.
void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& names,
                       const Eigen::MatrixXd& matrix);

}  // namespace textstack
