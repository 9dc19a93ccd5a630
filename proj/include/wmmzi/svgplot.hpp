#pragma once

#include <string>
#include <vector>

namespace wmmzi {

/// One plotted trace. Points are drawn as markers with optional error bars;
/// set line=true for a connected curve instead.
struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;  // empty for none
  std::string label;
  std::string color = "#1f77b4";
  bool line = false;
};

struct PlotLayout {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
  /// Free-form provenance text embedded as an SVG comment.
  std::string provenance;
};

/// Renders a standalone SVG line/scatter chart. No display dependencies;
/// output is deterministic for identical inputs.
std::string render_chart(const PlotLayout& layout,
                         const std::vector<PlotSeries>& series);

void write_chart(const std::string& path, const PlotLayout& layout,
                 const std::vector<PlotSeries>& series);

}  // namespace wmmzi
