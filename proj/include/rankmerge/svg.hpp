#pragma once

#include <map>
#include <string>
#include <vector>

namespace rankmerge {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
  /// Drawn next to the point when non-empty (used for variable plots).
  std::string annotation;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotPoint> points;
  /// Draws the unit circle, for plots of correlations with the components.
  bool unit_circle = false;
};

/// Label -> colour. Labels sorted lexicographically take colours in a fixed order.
std::map<std::string, std::string> palette_for(const std::vector<PlotPoint>& points);

/// SVG 1.1 scatter plot. Identical specs always render to identical bytes.
std::string render_svg(const PlotSpec& spec);

}  // namespace rankmerge
