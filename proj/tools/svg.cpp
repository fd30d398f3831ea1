#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace slngbm::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const SvgSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      double lo = s.y[i], hi = s.y[i];
      if (i < s.y_err.size()) {
        lo -= s.y_err[i];
        hi += s.y_err[i];
      }
      y_min = std::min(y_min, lo);
      y_max = std::max(y_max, hi);
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return kMarginTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";

  // axes
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
         num(kMarginLeft) + "\" y2=\"" + num(kHeight - kMarginBottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kHeight - kMarginBottom) +
         "\" x2=\"" + num(kWidth - kMarginRight) + "\" y2=\"" + num(kHeight - kMarginBottom) +
         "\" stroke=\"black\"/>\n";
  // tick labels at the extremes
  svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"" + num(kHeight - kMarginBottom + 18) +
         "\" font-size=\"11\" font-family=\"sans-serif\">" + num(x_min) + "</text>\n";
  svg += "<text x=\"" + num(kWidth - kMarginRight) + "\" y=\"" +
         num(kHeight - kMarginBottom + 18) +
         "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(x_max) +
         "</text>\n";
  svg += "<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(kHeight - kMarginBottom) +
         "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(y_min + y_pad) +
         "</text>\n";
  svg += "<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(kMarginTop + 4) +
         "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(y_max - y_pad) +
         "</text>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + y_label + "</text>\n";

  double legend_y = kMarginTop + 6.0;
  for (const SvgSeries& s : series) {
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i < s.y_err.size() && s.y_err[i] > 0.0) {
          svg += "<line x1=\"" + num(sx(s.x[i])) + "\" y1=\"" + num(sy(s.y[i] - s.y_err[i])) +
                 "\" x2=\"" + num(sx(s.x[i])) + "\" y2=\"" + num(sy(s.y[i] + s.y_err[i])) +
                 "\" stroke=\"" + s.color + "\"/>\n";
        }
        svg += "<circle cx=\"" + num(sx(s.x[i])) + "\" cy=\"" + num(sy(s.y[i])) +
               "\" r=\"3.5\" fill=\"" + s.color + "\"/>\n";
      }
    } else {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        pts += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
      svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\"";
      if (s.dashed) svg += " stroke-dasharray=\"6 4\"";
      svg += " stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";
    }
    svg += "<text x=\"" + num(kWidth - kMarginRight - 8) + "\" y=\"" + num(legend_y) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" + s.color +
           "\">" + s.label + "</text>\n";
    legend_y += 14.0;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace slngbm::cli
