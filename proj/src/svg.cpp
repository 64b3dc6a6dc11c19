#include "rankmerge/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "rankmerge/text.hpp"

namespace rankmerge {

namespace {

constexpr std::array<const char*, 10> kColours = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr double kWidth = 720.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;  // legend column
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;
};

Range padded_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double half = std::max(1.0, std::fabs(lo) * 0.1);
    return {lo - half, hi + half};
  }
  const double pad = 0.08 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::map<std::string, std::string> palette_for(const std::vector<PlotPoint>& points) {
  std::set<std::string> labels;
  for (const auto& p : points) labels.insert(p.label);
  std::map<std::string, std::string> palette;
  std::size_t i = 0;
  for (const auto& l : labels) palette[l] = kColours[i++ % kColours.size()];
  return palette;
}

std::string render_svg(const PlotSpec& spec) {
  double xmin = spec.unit_circle ? -1.0 : 0.0;
  double xmax = spec.unit_circle ? 1.0 : 0.0;
  double ymin = xmin;
  double ymax = xmax;
  bool first = !spec.unit_circle;
  for (const auto& p : spec.points) {
    if (first) {
      xmin = xmax = p.x;
      ymin = ymax = p.y;
      first = false;
    }
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const Range xr = padded_range(xmin, xmax);
  const Range yr = padded_range(ymin, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  const auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };
  const auto f = [](double v) { return format_fixed(v, 2); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<text x=\"" << f(kLeft + plot_w / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(spec.title) << "</text>\n"
      << "<rect x=\"" << f(kLeft) << "\" y=\"" << f(kTop) << "\" width=\"" << f(plot_w) << "\" height=\""
      << f(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Zero lines, when inside the frame.
  if (xr.lo < 0.0 && xr.hi > 0.0) {
    svg << "<line x1=\"" << f(sx(0)) << "\" y1=\"" << f(kTop) << "\" x2=\"" << f(sx(0)) << "\" y2=\""
        << f(kTop + plot_h) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  if (yr.lo < 0.0 && yr.hi > 0.0) {
    svg << "<line x1=\"" << f(kLeft) << "\" y1=\"" << f(sy(0)) << "\" x2=\"" << f(kLeft + plot_w) << "\" y2=\""
        << f(sy(0)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  if (spec.unit_circle) {
    svg << "<ellipse cx=\"" << f(sx(0)) << "\" cy=\"" << f(sy(0)) << "\" rx=\"" << f(sx(1) - sx(0)) << "\" ry=\""
        << f(sy(0) - sy(1)) << "\" fill=\"none\" stroke=\"#888888\"/>\n";
  }

  // Ticks.
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    svg << "<text x=\"" << f(sx(xv)) << "\" y=\"" << f(kTop + plot_h + 18) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << format_fixed(xv, 2) << "</text>\n";
    svg << "<text x=\"" << f(kLeft - 6) << "\" y=\"" << f(sy(yv) + 4) << "\" text-anchor=\"end\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << format_fixed(yv, 2) << "</text>\n";
  }
  svg << "<text x=\"" << f(kLeft + plot_w / 2) << "\" y=\"" << f(kHeight - 15) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << f(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 " << f(kTop + plot_h / 2) << ")\">" << escape(spec.y_label)
      << "</text>\n";

  const auto palette = palette_for(spec.points);
  for (const auto& p : spec.points) {
    const auto& colour = palette.at(p.label);
    svg << "<circle cx=\"" << f(sx(p.x)) << "\" cy=\"" << f(sy(p.y)) << "\" r=\"3\" fill=\"" << colour
        << "\" fill-opacity=\"0.8\"/>\n";
    if (!p.annotation.empty()) {
      svg << "<text x=\"" << f(sx(p.x) + 5) << "\" y=\"" << f(sy(p.y) - 5) << "\" font-family=\"sans-serif\" "
          << "font-size=\"11\">" << escape(p.annotation) << "</text>\n";
    }
  }

  double ly = kTop + 10;
  for (const auto& [label, colour] : palette) {
    svg << "<circle cx=\"" << f(kWidth - kRight + 20) << "\" cy=\"" << f(ly) << "\" r=\"5\" fill=\"" << colour
        << "\"/>\n";
    svg << "<text x=\"" << f(kWidth - kRight + 30) << "\" y=\"" << f(ly + 4) << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << escape(label) << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rankmerge
