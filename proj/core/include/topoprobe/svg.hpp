#pragma once

#include <string>
#include <vector>

namespace topoprobe {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ReferenceLine {
  std::string name;
  double x = 0.0;
};

/// Fixed-canvas line plot. Each series becomes one polyline, each reference a
/// dashed vertical line. Output depends only on the inputs.
struct Plot {
  std::string title;
  std::string x_label = "beta";
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<ReferenceLine> references;

  static constexpr double width = 720.0;
  static constexpr double height = 460.0;
  static constexpr double left = 70.0;
  static constexpr double right = 160.0;
  static constexpr double top = 40.0;
  static constexpr double bottom = 50.0;

  /// Data ranges covering every series and reference, padded when degenerate.
  double x_min() const;
  double x_max() const;
  double y_min() const;
  double y_max() const;

  /// Data to canvas coordinates.
  double map_x(double x) const;
  double map_y(double y) const;

  /// Throws std::invalid_argument when there are no series.
  std::string render() const;
};

}  // namespace topoprobe
