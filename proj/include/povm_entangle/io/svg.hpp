#pragma once

#include "povm_entangle/quasidist.hpp"

#include <cstdio>
#include <optional>
#include <string>

namespace povm::io {

namespace detail {

inline std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

struct SvgOptions {
  int cell = 56;           // width of one grid cell
  int half_height = 120;   // pixels for |Q| = scale, above or below the baseline
  double scale = 0.0;      // value mapped to half_height; 0 picks the largest |entry|
  std::string positive_fill = "#4c78a8";
  std::string negative_fill = "#e45756";
};

/// A 6x6 bar chart of Q: one bar per cell, laid out row by row along a
/// common zero baseline, so negative bars hang below it. Error bars are drawn
/// when `sigma` is given, followed by a listing of the local states.
inline std::string quasidistribution_svg(const std::string& title, const QuasiGrid& q,
                                         const std::optional<QuasiGrid>& sigma = {},
                                         const TildeDecomposition* states = nullptr, const SvgOptions& opt = {}) {
  double scale = opt.scale;
  if (scale <= 0) {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double extent = std::abs(q(i, j)) + (sigma && std::isfinite((*sigma)(i, j)) ? (*sigma)(i, j) : 0.0);
        scale = std::max(scale, extent);
      }
    if (scale <= 0) scale = 1.0;
  }
  const int left = 70, top = 40, panel_gap = 16;
  const int panel_w = 6 * opt.cell;
  const int panel_h = 2 * opt.half_height;
  const int grid_w = 6 * panel_w + 5 * panel_gap;
  const int listing_lines = states ? 14 : 0;
  const int width = left + grid_w + 20;
  const int height = top + panel_h + 60 + listing_lines * 16 + 10;
  const double baseline = top + opt.half_height;
  auto y_of = [&](double v) { return baseline - v / scale * opt.half_height; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
       std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"20\" font-size=\"14\">" + detail::escape(title) + "</text>\n";

  // value axis
  for (double v : {-scale, -scale / 2, 0.0, scale / 2, scale}) {
    const std::string y = detail::fmt(y_of(v));
    s += "<line x1=\"" + std::to_string(left - 4) + "\" x2=\"" + std::to_string(left + grid_w) + "\" y1=\"" + y +
         "\" y2=\"" + y + "\" stroke=\"" + (v == 0.0 ? "black" : "#dddddd") + "\"/>\n";
    s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + detail::fmt(y_of(v) + 4) +
         "\" text-anchor=\"end\">" + detail::fmt(v, 3) + "</text>\n";
  }

  for (int i = 0; i < 6; ++i) {
    const int x0 = left + i * (panel_w + panel_gap);
    s += "<text x=\"" + std::to_string(x0 + panel_w / 2) + "\" y=\"" + std::to_string(top + panel_h + 40) +
         "\" text-anchor=\"middle\">A: " + kLocalLabels[i] + "</text>\n";
    for (int j = 0; j < 6; ++j) {
      const double v = q(i, j);
      const double cx = x0 + j * opt.cell + opt.cell / 2.0;
      const double bw = opt.cell * 0.6;
      const double y0 = std::min(y_of(v), baseline), y1 = std::max(y_of(v), baseline);
      s += "<rect x=\"" + detail::fmt(cx - bw / 2) + "\" y=\"" + detail::fmt(y0) + "\" width=\"" + detail::fmt(bw) +
           "\" height=\"" + detail::fmt(y1 - y0) + "\" fill=\"" + (v < 0 ? opt.negative_fill : opt.positive_fill) +
           "\"><title>Q(" + kLocalLabels[i] + ", " + kLocalLabels[j] + ") = " + detail::fmt(v, 6) +
           "</title></rect>\n";
      if (sigma && std::isfinite((*sigma)(i, j)) && (*sigma)(i, j) > 0) {
        const double e = (*sigma)(i, j);
        const std::string x = detail::fmt(cx);
        s += "<line x1=\"" + x + "\" x2=\"" + x + "\" y1=\"" + detail::fmt(y_of(v - e)) + "\" y2=\"" +
             detail::fmt(y_of(v + e)) + "\" stroke=\"black\"/>\n";
      }
      s += "<text x=\"" + detail::fmt(cx) + "\" y=\"" + std::to_string(top + panel_h + 16) +
           "\" text-anchor=\"middle\" font-size=\"9\">" + kLocalLabels[j] + "</text>\n";
    }
  }

  if (states) {
    double y = top + panel_h + 70;
    s += "<text x=\"" + std::to_string(left) + "\" y=\"" + detail::fmt(y) +
         "\" font-weight=\"bold\">Local states (Bloch vectors)</text>\n";
    for (int side = 0; side < 2; ++side)
      for (int k = 0; k < 6; ++k) {
        y += 16;
        const Vec2c& v = side == 0 ? states->states_a[k] : states->states_b[k];
        const auto b = bloch_vector(v);
        s += "<text x=\"" + std::to_string(left) + "\" y=\"" + detail::fmt(y) + "\">" + (side == 0 ? "A " : "B ") +
             kLocalLabels[k] + "~ : (" + detail::fmt(b[0], 4) + ", " + detail::fmt(b[1], 4) + ", " +
             detail::fmt(b[2], 4) + ")</text>\n";
      }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace povm::io
