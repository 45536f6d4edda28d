// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "textstack/corpus.hpp"
#include "textstack/lexicon.hpp"
#include "textstack/rng.hpp"

using namespace textstack;

namespace {

Lexicon tiny_lexicon() {
  return parse_lexicon_text(
      "%\n"
      "1\taffect\n"
      "2\tsocial\n"
      "%\n"
      "happy\t1\n"
      "happ*\t1\n"
      "friend\t2\n",
      "tiny");
}

// Independent double loop over every (token, entry) pair; the production
// matcher uses hash lookups instead.
struct OracleLexicon {
  struct Pattern {
    std::string text;
    bool stem;
    std::vector<int> positions;
  };
  std::vector<Pattern> patterns;
  std::size_t category_count = 0;

  std::set<int> match(const std::string& token) const {
    std::set<int> hits;
    for (const auto& p : patterns) {
      bool hit = p.stem ? token.size() >= p.text.size() &&
                              token.compare(0, p.text.size(), p.text) == 0
                        : token == p.text;
      if (hit) hits.insert(p.positions.begin(), p.positions.end());
    }
    return hits;
  }
};

Eigen::VectorXd oracle_extract(const std::vector<std::string>& tokens,
                               const OracleLexicon& oracle) {
  std::size_t words = 0, punct = 0, dic = 0, terminators = 0;
  std::vector<std::size_t> cats(oracle.category_count, 0);
  for (const auto& token : tokens) {
    if (is_punct_token(token)) {
      ++punct;
      if (token.find_first_of(".!?") != std::string::npos) ++terminators;
      continue;
    }
    ++words;
    auto hits = oracle.match(token);
    if (!hits.empty()) ++dic;
    for (int pos : hits) ++cats[static_cast<std::size_t>(pos)];
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(
      kStructuralFeatureCount + static_cast<Eigen::Index>(oracle.category_count));
  const double sentences = terminators == 0 ? 1.0 : static_cast<double>(terminators);
  out[0] = static_cast<double>(words);
  out[1] = static_cast<double>(words) / sentences;
  if (words > 0) out[2] = 100.0 * static_cast<double>(dic) / static_cast<double>(words);
  if (!tokens.empty()) {
    out[3] = 100.0 * static_cast<double>(punct) / static_cast<double>(tokens.size());
  }
  for (std::size_t c = 0; c < cats.size(); ++c) {
    if (words > 0) {
      out[kStructuralFeatureCount + static_cast<Eigen::Index>(c)] =
          100.0 * static_cast<double>(cats[c]) / static_cast<double>(words);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("parse_lexicon: single category and literal entry") {
  auto lex = parse_lexicon_text("%\n1\taffect\n%\nhappy\t1\n", "t");
  REQUIRE(lex.categories().size() == 1);
  CHECK(lex.categories()[0].name == "affect");
  REQUIRE(lex.entries().size() == 1);
  CHECK(lex.match("happy") == std::vector<int>{0});
  CHECK(lex.match("sad").empty());
}

TEST_CASE("parse_lexicon: stem entry matches continuations") {
  auto lex = parse_lexicon_text("%\n1\taffect\n%\nhapp*\t1\n", "t");
  CHECK(lex.match("happy") == std::vector<int>{0});
  CHECK(lex.match("happily") == std::vector<int>{0});
  CHECK(lex.match("happ") == std::vector<int>{0});
  CHECK(lex.match("hap").empty());
}

TEST_CASE("parse_lexicon: undeclared category id names the entry") {
  CHECK_THROWS_WITH_AS(parse_lexicon_text("%\n1\taffect\n%\nsad\t9\n", "t"),
                       doctest::Contains("sad"), std::runtime_error);
}

TEST_CASE("parse_lexicon: malformed header and duplicate ids") {
  CHECK_THROWS_AS(parse_lexicon_text("1\taffect\n%\n", "t"), std::runtime_error);
  CHECK_THROWS_AS(parse_lexicon_text("%\n1\taffect\n", "t"), std::runtime_error);
  CHECK_THROWS_AS(
      parse_lexicon_text("%\n1\taffect\n1\tsocial\n%\nhappy\t1\n", "t"),
      std::runtime_error);
}

TEST_CASE("parse_lexicon: bundled demo lexicon loads") {
  auto lex = parse_lexicon(std::filesystem::path(TEXTSTACK_REPO_DIR) /
                           "data/demo_lexicon.dic");
  CHECK(lex.categories().size() >= 40);
  CHECK(!lex.match("idiot").empty());
  CHECK(feature_names(lex).size() ==
        kStructuralFeatureCount + lex.categories().size());
}

TEST_CASE("extract: empty token list is all zeros") {
  auto features = extract_features({}, tiny_lexicon());
  CHECK(features.norm() == 0.0);
}

TEST_CASE("extract: all tokens matching") {
  auto features = extract_features({"happy", "happy"}, tiny_lexicon());
  CHECK(features[0] == 2.0);          // word_count
  CHECK(features[2] == 100.0);        // dic
  CHECK(features[4] == 100.0);        // affect
  CHECK(features[5] == 0.0);          // social
}

TEST_CASE("extract: hand-counted mixed example") {
  // tokens [happy, rock, !]: word_count 2, punct 1 of 3 tokens, affect 1 of 2
  auto features = extract_features({"happy", "rock", "!"}, tiny_lexicon());
  CHECK(features[0] == 2.0);
  CHECK(features[1] == doctest::Approx(2.0));  // one terminator token -> 1 sentence... "!" is a terminator
  CHECK(features[2] == doctest::Approx(50.0));
  CHECK(features[3] == doctest::Approx(100.0 / 3.0));
  CHECK(features[4] == doctest::Approx(50.0));
}

TEST_CASE("extract: words_per_sentence uses terminator tokens") {
  auto lex = tiny_lexicon();
  // No terminators: one sentence.
  CHECK(extract_features({"a", "b", "c"}, lex)[1] == doctest::Approx(3.0));
  // Two terminator tokens: two sentences.
  CHECK(extract_features({"a", "b", ".", "c", "d", "!"}, lex)[1] ==
        doctest::Approx(2.0));
  // Comma is not a terminator.
  CHECK(extract_features({"a", ",", "b"}, lex)[1] == doctest::Approx(2.0));
}

TEST_CASE("extract: matches brute-force oracle on random instances") {
  Rng rng(555);
  const std::vector<std::string> alphabet = {"a", "b", "c", "ab", "abc",
                                             "bc", "ca", "abcb"};
  for (int round = 0; round < 100; ++round) {
    // Random lexicon: up to 20 patterns over up to 5 categories.
    const std::size_t n_cats = 1 + rng.below(5);
    std::vector<Lexicon::Category> cats;
    for (std::size_t c = 0; c < n_cats; ++c) {
      cats.push_back({static_cast<int>(c * 3 + 1),
                      "cat" + std::to_string(c)});  // non-contiguous ids
    }
    const std::size_t n_patterns = 1 + rng.below(20);
    std::vector<Lexicon::Entry> entries;
    OracleLexicon oracle;
    oracle.category_count = n_cats;
    for (std::size_t p = 0; p < n_patterns; ++p) {
      std::string text = alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];
      bool stem = rng.uniform() < 0.4;
      std::vector<int> ids;
      std::vector<int> positions;
      const std::size_t n_ids = 1 + rng.below(n_cats);
      for (std::size_t k = 0; k < n_ids; ++k) {
        const auto c = static_cast<std::size_t>(rng.below(n_cats));
        ids.push_back(cats[c].id);
        positions.push_back(static_cast<int>(c));
      }
      entries.push_back({stem ? text + "*" : text, ids});
      oracle.patterns.push_back({text, stem, positions});
    }
    Lexicon lex(cats, entries);

    // Random token list, up to 30 tokens, with punctuation mixed in.
    const std::size_t n_tokens = rng.below(31);
    std::vector<std::string> tokens;
    for (std::size_t t = 0; t < n_tokens; ++t) {
      if (rng.uniform() < 0.2) {
        tokens.push_back(rng.uniform() < 0.5 ? "!" : ",");
      } else {
        tokens.push_back(
            alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))]);
      }
    }

    Eigen::VectorXd got = extract_features(tokens, lex);
    Eigen::VectorXd want = oracle_extract(tokens, oracle);
    CAPTURE(round);
    REQUIRE(got.size() == want.size());
    CHECK((got - want).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    // All percentages stay in [0, 100].
    for (Eigen::Index i = 2; i < got.size(); ++i) {
      CHECK(got[i] >= 0.0);
      CHECK(got[i] <= 100.0);
    }
  }
}

TEST_CASE("fit_scaler/apply_scaler: two-point standardization") {
  Eigen::MatrixXd m(2, 1);
  m << 1, 3;
  auto scaler = fit_scaler(m);
  auto out = apply_scaler(scaler, m);
  CHECK(out(0, 0) == doctest::Approx(-1.0));
  CHECK(out(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("fit_scaler: constant column maps to zero and needs 2 rows") {
  Eigen::MatrixXd m(3, 1);
  m << 5, 5, 5;
  auto scaler = fit_scaler(m);
  CHECK(scaler.constant[0]);
  CHECK(apply_scaler(scaler, m).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd one(1, 1);
  CHECK_THROWS_AS(fit_scaler(one), std::runtime_error);
}

TEST_CASE("apply_scaler: fitted matrix has near-zero means and unit variance") {
  Rng rng(8);
  Eigen::MatrixXd m(40, 3);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-5.0, 5.0) * static_cast<double>(c + 1);
    }
  }
  auto out = apply_scaler(fit_scaler(m), m);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    CHECK(std::abs(out.col(c).mean()) < 1e-9);
    const double var = out.col(c).squaredNorm() / static_cast<double>(out.rows());
    CHECK(var == doctest::Approx(1.0));
  }
}

TEST_CASE("prune_correlated: duplicate column dropped with r = 1") {
  Eigen::MatrixXd m(5, 2);
  m << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  auto report = prune_correlated(m);
  CHECK(report.kept == std::vector<int>{0});
  REQUIRE(report.dropped.size() == 1);
  CHECK(report.dropped[0].feature == 1);
  CHECK(report.dropped[0].against == 0);
  CHECK(report.dropped[0].correlation == doctest::Approx(1.0));
}

TEST_CASE("prune_correlated: negated column dropped via |r|") {
  Eigen::MatrixXd m(4, 2);
  m << 1, -1, 2, -2, 5, -5, 9, -9;
  auto report = prune_correlated(m);
  CHECK(report.kept == std::vector<int>{0});
  REQUIRE(report.dropped.size() == 1);
  CHECK(report.dropped[0].correlation == doctest::Approx(-1.0));
}

TEST_CASE("prune_correlated: independent random columns all kept") {
  Rng rng(1000);
  Eigen::MatrixXd m(1000, 6);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.gaussian();
  }
  auto report = prune_correlated(m);
  CHECK(report.kept.size() == 6);
  CHECK(report.dropped.empty());
}

TEST_CASE("prune_correlated: constant columns kept and flagged") {
  Eigen::MatrixXd m(4, 2);
  m << 7, 1, 7, 2, 7, 3, 7, 4;
  auto report = prune_correlated(m);
  CHECK(report.kept == std::vector<int>{0, 1});
  CHECK(report.constant_features == std::vector<int>{0});
}

TEST_CASE("prune_correlated: same kept set before and after scaling") {
  Rng rng(2024);
  Eigen::MatrixXd m(200, 5);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double base = rng.gaussian();
    m(r, 0) = base;
    m(r, 1) = 3.0 * base + 0.01 * rng.gaussian();  // nearly duplicate
    m(r, 2) = rng.gaussian();
    m(r, 3) = -m(r, 2) * 2.0;                      // negated duplicate
    m(r, 4) = rng.gaussian() + 0.2 * base;
  }
  auto raw = prune_correlated(m);
  auto scaled = prune_correlated(apply_scaler(fit_scaler(m), m));
  CHECK(raw.kept == scaled.kept);
}

TEST_CASE("select_columns picks by index") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  auto out = select_columns(m, {2, 0});
  CHECK(out(0, 0) == 3);
  CHECK(out(1, 1) == 4);
}
