#pragma once

#include <string>
#include <vector>

namespace slngbm::cli {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool points = false;           // draw markers instead of a line
  std::vector<double> y_err;     // optional error bars (with points)
};

/// Minimal deterministic SVG line chart writer: fixed canvas, linear axes,
/// no timestamps, stable number formatting.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace slngbm::cli
