#include "topoprobe/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace topoprobe {
namespace {

constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf.data();
}

std::string escape(const std::string& s) {
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

std::pair<double, double> padded(double lo, double hi) {
  if (!(lo < hi)) {
    const double pad = std::abs(lo) > 0.0 ? 0.5 * std::abs(lo) : 1.0;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

}  // namespace

double Plot::x_min() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double x : s.x) lo = std::min(lo, x), hi = std::max(hi, x);
  }
  for (const auto& r : references) lo = std::min(lo, r.x), hi = std::max(hi, r.x);
  return padded(lo, hi).first;
}

double Plot::x_max() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double x : s.x) lo = std::min(lo, x), hi = std::max(hi, x);
  }
  for (const auto& r : references) lo = std::min(lo, r.x), hi = std::max(hi, r.x);
  return padded(lo, hi).second;
}

double Plot::y_min() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double y : s.y) lo = std::min(lo, y), hi = std::max(hi, y);
  }
  return padded(lo, hi).first;
}

double Plot::y_max() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double y : s.y) lo = std::min(lo, y), hi = std::max(hi, y);
  }
  return padded(lo, hi).second;
}

double Plot::map_x(double x) const {
  const double w = width - left - right;
  return left + (x - x_min()) / (x_max() - x_min()) * w;
}

double Plot::map_y(double y) const {
  const double h = height - top - bottom;
  return top + (1.0 - (y - y_min()) / (y_max() - y_min())) * h;
}

std::string Plot::render() const {
  if (series.empty()) throw std::invalid_argument("plot needs at least one series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) {
      throw std::invalid_argument("series '" + s.name + "' has mismatched or empty data");
    }
  }
  const double x0 = left;
  const double x1 = width - right;
  const double y0 = top;
  const double y1 = height - bottom;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                    "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
                    fmt(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
           escape(title) + "</text>\n";
  }
  svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(x1 - x0) +
         "\" height=\"" + fmt(y1 - y0) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min() + (x_max() - x_min()) * i / 5.0;
    const double yv = y_min() + (y_max() - y_min()) * i / 5.0;
    const double px = map_x(xv);
    const double py = map_y(yv);
    svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(px) + "\" y2=\"" +
           fmt(y1 + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(y1 + 18) + "\" text-anchor=\"middle\">" +
           tick(xv) + "</text>\n";
    svg += "<line x1=\"" + fmt(x0 - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(x0) + "\" y2=\"" +
           fmt(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(x0 - 8) + "\" y=\"" + fmt(py + 4) + "\" text-anchor=\"end\">" +
           tick(yv) + "</text>\n";
  }
  svg += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"" + fmt(height - 12) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  if (!y_label.empty()) {
    svg += "<text x=\"16\" y=\"" + fmt((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
  }

  double legend_y = y0 + 10;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) points += ' ';
      points += fmt(map_x(s.x[i])) + "," + fmt(map_y(s.y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    svg += "<rect x=\"" + fmt(x1 + 12) + "\" y=\"" + fmt(legend_y - 8) +
           "\" width=\"14\" height=\"3\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + fmt(x1 + 32) + "\" y=\"" + fmt(legend_y - 3) + "\">" + escape(s.name) +
           "</text>\n";
    legend_y += 18;
  }
  for (const auto& r : references) {
    const double px = map_x(r.x);
    svg += "<line class=\"reference\" x1=\"" + fmt(px) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(px) +
           "\" y2=\"" + fmt(y1) + "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + fmt(x1 + 12) + "\" y=\"" + fmt(legend_y - 3) + "\">- - " + escape(r.name) +
           "</text>\n";
    legend_y += 18;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace topoprobe
