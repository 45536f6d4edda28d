// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <set>

#include "textstack/io.hpp"
#include "textstack/metrics.hpp"
#include "textstack/report.hpp"
#include "textstack/rng.hpp"
#include "textstack/tsne.hpp"

using namespace textstack;

namespace {

std::vector<std::string> classes4() {
  return {"normal", "spam", "abusive", "hateful"};
}

Eigen::MatrixXd clustered_points(int per_cluster, int dims, Rng& rng,
                                 std::vector<int>* labels = nullptr) {
  Eigen::MatrixXd points(3 * per_cluster, dims);
  const double centers[3] = {-8.0, 0.0, 8.0};
  for (int cluster = 0; cluster < 3; ++cluster) {
    for (int i = 0; i < per_cluster; ++i) {
      const int row = cluster * per_cluster + i;
      for (int d = 0; d < dims; ++d) {
        points(row, d) = centers[cluster] + rng.gaussian();
      }
      if (labels) labels->push_back(cluster);
    }
  }
  return points;
}

}  // namespace

TEST_CASE("accuracy: counting and errors") {
  CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(accuracy({1, 2, 3}, {0, 0, 0}) == 0.0);
  CHECK(accuracy({1, 1, 1, 0}, {1, 1, 1, 1}) == 0.75);
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), std::runtime_error);
  CHECK_THROWS_AS(accuracy({}, {}), std::runtime_error);
}

TEST_CASE("confusion: perfect predictions sit on the diagonal") {
  std::vector<int> golds = {0, 1, 2, 3, 2, 1};
  auto matrix = confusion(golds, golds, classes4());
  CHECK(matrix.counts.diagonal().sum() == 6);
  CHECK(matrix.counts.sum() == 6);
  auto normalized = row_normalize(matrix);
  CHECK(normalized.diagonal().sum() == doctest::Approx(4.0));
}

TEST_CASE("confusion: single off-diagonal cell") {
  auto matrix = confusion({2}, {3}, classes4());  // gold hateful, pred abusive
  CHECK(matrix.counts(3, 2) == 1);
  CHECK(matrix.counts.sum() == 1);
}

TEST_CASE("confusion: unknown label index throws") {
  CHECK_THROWS_AS(confusion({7}, {0}, classes4()), std::runtime_error);
}

TEST_CASE("row_normalize: rows sum to 1, zero rows flagged") {
  auto matrix = confusion({0, 0, 1}, {0, 1, 1}, classes4());
  std::vector<int> zero_rows;
  auto normalized = row_normalize(matrix, &zero_rows);
  for (Eigen::Index r = 0; r < 2; ++r) {
    CHECK(normalized.row(r).sum() == doctest::Approx(1.0));
  }
  CHECK(zero_rows == std::vector<int>{2, 3});
}

TEST_CASE("accuracy equals confusion trace over total") {
  Rng rng(2025);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 1 + rng.below(200);
    std::vector<int> preds(n), golds(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = static_cast<int>(rng.below(4));
      golds[i] = static_cast<int>(rng.below(4));
    }
    auto matrix = confusion(preds, golds, classes4());
    CHECK(accuracy(preds, golds) ==
          doctest::Approx(static_cast<double>(matrix.counts.diagonal().sum()) /
                          static_cast<double>(matrix.total())));
  }
}

TEST_CASE("precision_recall_f1: identity matrix is all ones") {
  auto matrix = confusion({0, 1, 2, 3}, {0, 1, 2, 3}, classes4());
  for (const auto& prf : precision_recall_f1(matrix)) {
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == 1.0);
  }
}

TEST_CASE("precision_recall_f1: never-predicted class flagged") {
  auto matrix = confusion({0, 0, 0, 0}, {0, 1, 2, 3}, classes4());
  auto prf = precision_recall_f1(matrix);
  CHECK(prf[1].precision == 0.0);
  CHECK(!prf[1].precision_defined);
  CHECK(prf[1].recall == 0.0);
  CHECK(prf[1].recall_defined);
}

TEST_CASE("precision_recall_f1: hand-computed 2x2 fixture") {
  // counts: gold a -> [3 pred a, 1 pred b]; gold b -> [2 pred a, 4 pred b]
  std::vector<int> golds = {0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  std::vector<int> preds = {0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  auto matrix = confusion(preds, golds, {"a", "b"});
  auto prf = precision_recall_f1(matrix);
  // class a: precision 3/5, recall 3/4, f1 = 2*0.6*0.75/(0.6+0.75) = 2/3
  CHECK(prf[0].precision == doctest::Approx(0.6));
  CHECK(prf[0].recall == doctest::Approx(0.75));
  CHECK(prf[0].f1 == doctest::Approx(2.0 / 3.0));
  // class b: precision 4/5, recall 4/6, f1 = 2*0.8*(2/3)/(0.8+2/3)
  CHECK(prf[1].precision == doctest::Approx(0.8));
  CHECK(prf[1].recall == doctest::Approx(2.0 / 3.0));
  CHECK(prf[1].f1 == doctest::Approx(2.0 * 0.8 * (2.0 / 3.0) / (0.8 + 2.0 / 3.0)));
}

TEST_CASE("tsne: smallest nontrivial case stays finite") {
  // Pairwise distances must be distinct so every row can reach the target
  // perplexity; an equidistant pair pins its row at perplexity 2.
  Eigen::MatrixXd points(3, 2);
  points << 0, 0, 1, 0, 3, 0;
  TsneConfig config;
  config.perplexity = 1.5;
  config.iterations = 120;
  config.exaggeration_iters = 40;
  config.seed = 1;
  auto projection = tsne(points, {0, 1, 2}, config);
  REQUIRE(projection.coords.rows() == 3);
  CHECK(projection.coords.allFinite());
  CHECK(std::isfinite(projection.final_kl));
}

TEST_CASE("tsne: per-row perplexity calibrated within 1e-3") {
  Rng rng(314);
  Eigen::MatrixXd points(200, 10);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      points(r, c) = rng.gaussian();
    }
  }
  std::vector<double> row_perplexities;
  tsne_conditional(points, 30.0, &row_perplexities);
  REQUIRE(row_perplexities.size() == 200);
  for (double p : row_perplexities) {
    CHECK(std::abs(p - 30.0) <= 1e-3);
  }
}

TEST_CASE("tsne: final KL below the post-exaggeration baseline") {
  Rng rng(315);
  std::vector<int> labels;
  auto points = clustered_points(20, 4, rng, &labels);
  TsneConfig config;
  config.perplexity = 10.0;
  config.iterations = 500;
  config.exaggeration_iters = 100;
  config.seed = 7;
  auto projection = tsne(points, labels, config);
  CHECK(projection.final_kl < projection.initial_kl);
  CHECK(projection.final_kl >= 0.0);
}

TEST_CASE("tsne: duplicated input pair lands among the closest outputs") {
  Rng rng(316);
  Eigen::MatrixXd points(30, 4);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      points(r, c) = rng.uniform(-3.0, 3.0);
    }
  }
  points.row(29) = points.row(13);  // exact duplicate pair (13, 29)

  TsneConfig config;
  config.perplexity = 5.0;
  config.iterations = 400;
  config.exaggeration_iters = 100;
  config.seed = 9;
  auto projection = tsne(points, {}, config);

  const double pair_dist =
      (projection.coords.row(13) - projection.coords.row(29)).norm();
  int closer = 0;
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = i + 1; j < 30; ++j) {
      if ((projection.coords.row(i) - projection.coords.row(j)).norm() <
          pair_dist) {
        ++closer;
      }
    }
  }
  // Among the smallest distances of the 435 pairs.
  CHECK(closer <= 8);
}

TEST_CASE("tsne: fixed seed reproduces coordinates bitwise") {
  Rng rng(317);
  auto points = clustered_points(10, 3, rng);
  TsneConfig config;
  config.perplexity = 5.0;
  config.iterations = 260;
  config.seed = 11;
  auto a = tsne(points, {}, config);
  auto b = tsne(points, {}, config);
  CHECK((a.coords - b.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.final_kl == b.final_kl);
}

TEST_CASE("tsne: degenerate identical inputs return flagged noise layout") {
  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(12, 3);
  TsneConfig config;
  config.perplexity = 3.0;
  config.iterations = 50;
  config.seed = 2;
  auto projection = tsne(points, {}, config);
  CHECK(projection.degenerate);
  CHECK(projection.coords.allFinite());
  CHECK(projection.coords.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("tsne: infeasible perplexity and label mismatch are errors") {
  Eigen::MatrixXd points(10, 2);
  points.setRandom();
  TsneConfig config;
  config.perplexity = 9.5;  // >= N - 1
  CHECK_THROWS_AS(tsne(points, {}, config), std::runtime_error);
  config.perplexity = 0.5;
  CHECK_THROWS_AS(tsne(points, {}, config), std::runtime_error);
  config.perplexity = 3.0;
  CHECK_THROWS_AS(tsne(points, {0, 1}, config), std::runtime_error);
  config.iterations = 0;
  CHECK_THROWS_AS(tsne(points, {}, config), std::runtime_error);
}

TEST_CASE("report: empty results render a schema-valid skeleton") {
  EvalReport report;
  auto text = render_report(report);
  CHECK(text.find("textstack-report schema_version=1") == 0);
  CHECK(text.find("[run]") != std::string::npos);
  CHECK(text.find("[accuracy]") != std::string::npos);
}

TEST_CASE("report: byte-identical re-render") {
  EvalReport report;
  report.run_meta.emplace_back("seed", "42");
  ModelEval eval;
  eval.name = "lex";
  eval.accuracy = 0.875;
  eval.confusion = confusion({0, 1, 2, 3, 0, 1, 2, 0},
                             {0, 1, 2, 3, 0, 1, 2, 1}, classes4());
  eval.prf = precision_recall_f1(eval.confusion);
  report.models.push_back(eval);

  auto once = render_report(report);
  auto twice = render_report(report);
  CHECK(once == twice);
  CHECK(once.find("lex\t0.875000") != std::string::npos);

  auto path = std::filesystem::temp_directory_path() / "report_stability.txt";
  emit_report(report, path);
  emit_report(report, path);
  CHECK(read_file(path) == once);
}

TEST_CASE("heatmap: 4x4 fractions render 16 cells with labels") {
  Eigen::MatrixXd fractions = Eigen::MatrixXd::Identity(4, 4);
  auto svg = render_heatmap_svg(fractions, classes4(), "test");
  std::size_t rects = 0;
  for (std::size_t at = svg.find("<rect"); at != std::string::npos;
       at = svg.find("<rect", at + 1)) {
    ++rects;
  }
  CHECK(rects == 17);  // 16 cells + background
  CHECK(svg.find(">hateful</text>") != std::string::npos);
  CHECK(render_heatmap_svg(fractions, classes4(), "test") == svg);
}

TEST_CASE("scatter: one circle per point plus legend") {
  Projection2D projection;
  projection.coords.resize(5, 2);
  projection.coords << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4;
  projection.labels = {0, 1, 2, 3, 0};
  auto svg = render_scatter_svg(projection, classes4(), "demo");
  std::size_t circles = 0;
  for (std::size_t at = svg.find("<circle"); at != std::string::npos;
       at = svg.find("<circle", at + 1)) {
    ++circles;
  }
  CHECK(circles == 5 + 4);
}

TEST_CASE("projection csv: id,x,y,label rows") {
  Projection2D projection;
  projection.coords.resize(2, 2);
  projection.coords << 1.5, -2.5, 0.0, 3.25;
  projection.labels = {0, 3};
  auto path = std::filesystem::temp_directory_path() / "proj.csv";
  write_projection_csv(projection, {"a", "b"}, classes4(), path);
  auto content = read_file(path);
  CHECK(content.find("id,x,y,label\n") == 0);
  CHECK(content.find("a,1.5,-2.5,normal") != std::string::npos);
  CHECK(content.find("b,0,3.25,hateful") != std::string::npos);
}
