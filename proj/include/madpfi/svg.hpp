// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_SVG_HPP
#define MADPFI_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "madpfi/errors.hpp"

namespace madpfi {

struct ScatterPoint {
  double x = 0;
  double y = 0;
  std::string label;
};

struct ScatterStyle {
  int width = 760;
  int height = 520;
  int margin = 56;
  std::string x_label = "x";
  std::string y_label = "y";
  std::string title;
};

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
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

/// Round tick step of the form {1,2,5}*10^k covering the span with 4..8 ticks.
inline double tick_step(double span) {
  if (span <= 0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace svg_detail

/// Renders a labeled scatter plot. Byte-deterministic for identical input.
inline std::string render_scatter_svg(const std::vector<ScatterPoint>& points,
                                      const ScatterStyle& style = {}) {
  using svg_detail::escape;
  using svg_detail::fmt;
  if (points.empty()) throw ValidationError("scatter plot needs points");

  double x_lo = points[0].x, x_hi = points[0].x;
  double y_lo = points[0].y, y_hi = points[0].y;
  for (const auto& p : points) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  // Pad degenerate or tight ranges so points sit inside the frame.
  const double x_pad = (x_hi - x_lo) > 0 ? 0.05 * (x_hi - x_lo) : 1.0;
  const double y_pad = (y_hi - y_lo) > 0 ? 0.05 * (y_hi - y_lo) : 1.0;
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  const double m = style.margin;
  const double pw = style.width - 2 * m;
  const double ph = style.height - 2 * m;
  auto sx = [&](double x) { return m + pw * (x - x_lo) / (x_hi - x_lo); };
  auto sy = [&](double y) { return m + ph * (y_hi - y) / (y_hi - y_lo); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(style.width) + "\" height=\"" +
         std::to_string(style.height) + "\" viewBox=\"0 0 " +
         std::to_string(style.width) + " " + std::to_string(style.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";

  // Axes frame.
  out += "<rect x=\"" + fmt(m) + "\" y=\"" + fmt(m) + "\" width=\"" +
         fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = svg_detail::tick_step(x_hi - x_lo);
  for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9; t += xs) {
    out += "<line x1=\"" + fmt(sx(t)) + "\" y1=\"" + fmt(m + ph) +
           "\" x2=\"" + fmt(sx(t)) + "\" y2=\"" + fmt(m + ph + 5) +
           "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + fmt(sx(t)) + "\" y=\"" + fmt(m + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
  }
  const double ys = svg_detail::tick_step(y_hi - y_lo);
  for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9; t += ys) {
    out += "<line x1=\"" + fmt(m - 5) + "\" y1=\"" + fmt(sy(t)) +
           "\" x2=\"" + fmt(m) + "\" y2=\"" + fmt(sy(t)) +
           "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + fmt(m - 8) + "\" y=\"" + fmt(sy(t) + 4) +
           "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
  }

  for (const auto& p : points) {
    out += "<circle cx=\"" + fmt(sx(p.x)) + "\" cy=\"" + fmt(sy(p.y)) +
           "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.75\"/>\n";
    if (!p.label.empty())
      out += "<text x=\"" + fmt(sx(p.x) + 4) + "\" y=\"" +
             fmt(sy(p.y) - 4) + "\" font-size=\"9\" fill=\"#555\">" +
             escape(p.label) + "</text>\n";
  }

  out += "<text x=\"" + fmt(m + pw / 2) + "\" y=\"" +
         fmt(m + ph + 38) + "\" text-anchor=\"middle\">" +
         escape(style.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt(m + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(m + ph / 2) + ")\">" + escape(style.y_label) + "</text>\n";
  if (!style.title.empty())
    out += "<text x=\"" + fmt(m + pw / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
           escape(style.title) + "</text>\n";
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace madpfi

#endif  // MADPFI_SVG_HPP
