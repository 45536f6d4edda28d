// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "textstack/metrics.hpp"
#include "textstack/tsne.hpp"

namespace textstack {

/// One evaluated model: accuracy, confusion counts, per-class metrics.
struct ModelEval {
  std::string name;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<ClassPRF> prf;
};

/// Structured evaluation report. Rendered as sectioned key-value text
/// (schema v1): [run] metadata, then per-model [accuracy], [confusion *]
/// (row-normalized fractions), and [metrics *] sections. Rendering is
/// byte-stable for fixed inputs.
struct EvalReport {
  int schema_version = 1;
  std::vector<std::pair<std::string, std::string>> run_meta;
  std::vector<ModelEval> models;
};

std::string render_report(const EvalReport& report);
void emit_report(const EvalReport& report, const std::filesystem::path& path);

/// Standalone SVG scatter of a 2-D projection, points colored by class.
std::string render_scatter_svg(const Projection2D& projection,
                               const std::vector<std::string>& class_names,
                               const std::string& title);
void emit_scatter_svg(const Projection2D& projection,
                      const std::vector<std::string>& class_names,
                      const std::string& title,
                      const std::filesystem::path& path);

/// Standalone SVG heatmap of row-normalized confusion fractions, one cell
/// per (gold, predicted) pair with row/column labels.
std::string render_heatmap_svg(const Eigen::MatrixXd& fractions,
                               const std::vector<std::string>& class_names,
                               const std::string& title);
void emit_heatmap_svg(const Eigen::MatrixXd& fractions,
                      const std::vector<std::string>& class_names,
                      const std::string& title,
                      const std::filesystem::path& path);

/// CSV "id,x,y,label" rows for a projection.
void write_projection_csv(const Projection2D& projection,
                          const std::vector<std::string>& ids,
                          const std::vector<std::string>& class_names,
                          const std::filesystem::path& path);

}  // namespace textstack
