#pragma once

#include <span>
#include <string>
#include <vector>

namespace topoprobe {

/// Mean prediction per label.
struct PredictionCurve {
  std::vector<double> beta_labels;  // ascending
  std::vector<double> mean_pred;
  std::vector<std::size_t> counts;
  std::vector<double> spread;  // population std of the predictions per label
};

/// Groups predictions by their exact label. Throws on size mismatch or empty input.
PredictionCurve prediction_curve(std::span<const double> labels, std::span<const double> predictions);

/// Same, restricted to an explicit ascending grid; a grid point without
/// records is an error.
PredictionCurve prediction_curve(std::span<const double> labels, std::span<const double> predictions,
                                 std::span<const double> grid);

/// Central differences on interior points.
struct DerivativeCurve {
  std::vector<double> beta;
  std::vector<double> d;
};

DerivativeCurve derivative_curve(const PredictionCurve& curve);

/// Centered box average; windows are truncated at the ends. Window 1 is the identity.
std::vector<double> box_smooth(std::span<const double> values, int window);

/// Default window: 3, or 1 when the curve has at most 5 points.
int default_smoothing_window(std::size_t points);

struct TransitionReport {
  double beta_star = 0.0;
  double uncertainty = 0.0;
  std::string method;  // nn, dos, chi_f
  double grid_step = 0.0;
  int window = 1;
  bool no_peak = false;
  int members = 1;
};

/// argmax of the smoothed D; ties go to the smaller β. A flat curve sets no_peak.
/// window < 0 selects default_smoothing_window.
TransitionReport find_crossover(const DerivativeCurve& dcurve, int window = -1,
                                const std::string& method = "nn");

/// Largest prominence among the secondary local maxima of the smoothed D,
/// relative to the main peak height above the curve minimum. 0 for a single peak.
double peak_dominance(const DerivativeCurve& dcurve, int window = -1);

/// Mean and population std of member β*.
TransitionReport ensemble_crossover(std::span<const TransitionReport> members);
TransitionReport ensemble_crossover(std::span<const double> beta_stars);

/// β* = a + b ln(2N²) by ordinary least squares.
struct ScalingFit {
  std::vector<int> sizes;
  std::vector<double> beta_stars;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> residuals;
  double r_squared = 0.0;
};

/// Needs at least 3 sizes, not all equal.
ScalingFit scaling_fit(std::span<const int> sizes, std::span<const double> beta_stars);

}  // namespace topoprobe
