// SPDX-License-Identifier: Apache-2.0
#include "textstack/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "textstack/io.hpp"

namespace textstack {

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

}  // namespace

std::string render_report(const EvalReport& report) {
  std::ostringstream out;
  out << "textstack-report schema_version=" << report.schema_version << "\n";
  out << "[run]\n";
  for (const auto& [key, value] : report.run_meta) {
    out << key << "\t" << value << "\n";
  }
  out << "[accuracy]\n";
  for (const auto& model : report.models) {
    out << model.name << "\t" << fmt("%.6f", model.accuracy) << "\n";
  }
  for (const auto& model : report.models) {
    out << "[confusion " << model.name << "]\n";
    Eigen::MatrixXd fractions = row_normalize(model.confusion);
    for (Eigen::Index r = 0; r < fractions.rows(); ++r) {
      for (Eigen::Index c = 0; c < fractions.cols(); ++c) {
        if (c) out << "\t";
        out << fmt("%.6f", fractions(r, c));
      }
      out << "\n";
    }
  }
  for (const auto& model : report.models) {
    out << "[metrics " << model.name << "]\n";
    for (std::size_t c = 0; c < model.prf.size(); ++c) {
      const auto& prf = model.prf[c];
      out << model.confusion.class_names[c] << "\t"
          << fmt("%.6f", prf.precision) << "\t" << fmt("%.6f", prf.recall)
          << "\t" << fmt("%.6f", prf.f1);
      if (!prf.precision_defined) out << "\tprecision_undefined";
      if (!prf.recall_defined) out << "\trecall_undefined";
      out << "\n";
    }
  }
  return out.str();
}

void emit_report(const EvalReport& report, const std::filesystem::path& path) {
  write_file(path, render_report(report));
}

namespace {

constexpr const char* kClassColors[] = {"#4c72b0", "#dd8452", "#55a868",
                                        "#c44e52", "#8172b3", "#937860"};
constexpr int kPalette = 6;

}  // namespace

std::string render_scatter_svg(const Projection2D& projection,
                               const std::vector<std::string>& class_names,
                               const std::string& title) {
  const int width = 640;
  const int height = 640;
  const double margin = 48.0;

  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  if (projection.coords.rows() > 0) {
    min_x = projection.coords.col(0).minCoeff();
    max_x = projection.coords.col(0).maxCoeff();
    min_y = projection.coords.col(1).minCoeff();
    max_y = projection.coords.col(1).maxCoeff();
  }
  if (max_x == min_x) max_x = min_x + 1.0;
  if (max_y == min_y) max_y = min_y + 1.0;
  const double span = static_cast<double>(width) - 2.0 * margin;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";

  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    const double px =
        margin + (projection.coords(i, 0) - min_x) / (max_x - min_x) * span;
    const double py = static_cast<double>(height) - margin -
                      (projection.coords(i, 1) - min_y) / (max_y - min_y) * span;
    const int label =
        projection.labels.empty() ? 0 : projection.labels[static_cast<std::size_t>(i)];
    out << "<circle cx=\"" << fmt("%.2f", px) << "\" cy=\"" << fmt("%.2f", py)
        << "\" r=\"3\" fill=\"" << kClassColors[label % kPalette]
        << "\" fill-opacity=\"0.7\"/>\n";
  }

  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const double ly = 40.0 + 18.0 * static_cast<double>(c);
    out << "<circle cx=\"" << width - 120 << "\" cy=\"" << fmt("%.2f", ly)
        << "\" r=\"5\" fill=\"" << kClassColors[c % kPalette] << "\"/>\n";
    out << "<text x=\"" << width - 108 << "\" y=\"" << fmt("%.2f", ly + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << class_names[c]
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_scatter_svg(const Projection2D& projection,
                      const std::vector<std::string>& class_names,
                      const std::string& title,
                      const std::filesystem::path& path) {
  write_file(path, render_scatter_svg(projection, class_names, title));
}

std::string render_heatmap_svg(const Eigen::MatrixXd& fractions,
                               const std::vector<std::string>& class_names,
                               const std::string& title) {
  const Eigen::Index classes = fractions.rows();
  if (fractions.cols() != classes ||
      static_cast<Eigen::Index>(class_names.size()) != classes) {
    throw std::runtime_error("render_heatmap_svg: shape mismatch");
  }
  const double cell = 84.0;
  const double left = 110.0;
  const double top = 70.0;
  const int width = static_cast<int>(left + cell * static_cast<double>(classes) + 30.0);
  const int height = static_cast<int>(top + cell * static_cast<double>(classes) + 40.0);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";

  for (Eigen::Index r = 0; r < classes; ++r) {
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double v = std::clamp(fractions(r, c), 0.0, 1.0);
      // White at 0 toward a deep blue at 1.
      const int red = static_cast<int>(std::lround(255.0 - 203.0 * v));
      const int green = static_cast<int>(std::lround(255.0 - 141.0 * v));
      const int blue = static_cast<int>(std::lround(255.0 - 79.0 * v));
      const double x = left + cell * static_cast<double>(c);
      const double y = top + cell * static_cast<double>(r);
      out << "<rect x=\"" << fmt("%.1f", x) << "\" y=\"" << fmt("%.1f", y)
          << "\" width=\"" << fmt("%.1f", cell) << "\" height=\""
          << fmt("%.1f", cell) << "\" fill=\"rgb(" << red << "," << green
          << "," << blue << ")\" stroke=\"#cccccc\"/>\n";
      out << "<text x=\"" << fmt("%.1f", x + cell / 2.0) << "\" y=\""
          << fmt("%.1f", y + cell / 2.0 + 5.0)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          << "font-size=\"14\" fill=\"" << (v > 0.55 ? "white" : "black")
          << "\">" << fmt("%.2f", v) << "</text>\n";
    }
  }
  for (Eigen::Index c = 0; c < classes; ++c) {
    out << "<text x=\""
        << fmt("%.1f", left + cell * (static_cast<double>(c) + 0.5)) << "\" y=\""
        << fmt("%.1f", top - 10.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\">" << class_names[static_cast<std::size_t>(c)]
        << "</text>\n";
  }
  for (Eigen::Index r = 0; r < classes; ++r) {
    out << "<text x=\"" << fmt("%.1f", left - 8.0) << "\" y=\""
        << fmt("%.1f", top + cell * (static_cast<double>(r) + 0.5) + 4.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"13\">" << class_names[static_cast<std::size_t>(r)]
        << "</text>\n";
  }
  out << "<text x=\"" << fmt("%.1f", left - 70.0) << "\" y=\""
      << fmt("%.1f", top + cell * static_cast<double>(classes) / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 " << fmt("%.1f", left - 70.0) << " "
      << fmt("%.1f", top + cell * static_cast<double>(classes) / 2.0)
      << ")\">gold</text>\n";
  out << "<text x=\""
      << fmt("%.1f", left + cell * static_cast<double>(classes) / 2.0)
      << "\" y=\"" << fmt("%.1f", top - 36.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">predicted</text>\n";
  out << "</svg>\n";
  return out.str();
}

void emit_heatmap_svg(const Eigen::MatrixXd& fractions,
                      const std::vector<std::string>& class_names,
                      const std::string& title,
                      const std::filesystem::path& path) {
  write_file(path, render_heatmap_svg(fractions, class_names, title));
}

void write_projection_csv(const Projection2D& projection,
                          const std::vector<std::string>& ids,
                          const std::vector<std::string>& class_names,
                          const std::filesystem::path& path) {
  if (static_cast<Eigen::Index>(ids.size()) != projection.coords.rows()) {
    throw std::runtime_error("write_projection_csv: id count mismatch");
  }
  std::ostringstream out;
  out << "id,x,y,label\n";
  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    const int label = projection.labels.empty()
                          ? 0
                          : projection.labels[static_cast<std::size_t>(i)];
    out << ids[static_cast<std::size_t>(i)] << ","
        << fmt("%.17g", projection.coords(i, 0)) << ","
        << fmt("%.17g", projection.coords(i, 1)) << ","
        << class_names[static_cast<std::size_t>(label)] << "\n";
  }
  write_file(path, out.str());
}

}  // namespace textstack
