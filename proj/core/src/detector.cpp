#include "topoprobe/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "topoprobe/stats.hpp"

namespace topoprobe {
namespace {

PredictionCurve curve_from_groups(const std::map<double, std::vector<double>>& groups) {
  PredictionCurve curve;
  for (const auto& [beta, preds] : groups) {
    curve.beta_labels.push_back(beta);
    curve.mean_pred.push_back(mean(preds));
    curve.counts.push_back(preds.size());
    curve.spread.push_back(population_std(preds));
  }
  return curve;
}

std::map<double, std::vector<double>> group(std::span<const double> labels,
                                            std::span<const double> predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("labels and predictions differ in length");
  }
  if (labels.empty()) throw std::invalid_argument("prediction curve needs at least one record");
  std::map<double, std::vector<double>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(predictions[i]);
  return groups;
}

}  // namespace

PredictionCurve prediction_curve(std::span<const double> labels, std::span<const double> predictions) {
  return curve_from_groups(group(labels, predictions));
}

PredictionCurve prediction_curve(std::span<const double> labels, std::span<const double> predictions,
                                 std::span<const double> grid) {
  auto groups = group(labels, predictions);
  std::map<double, std::vector<double>> selected;
  for (double beta : grid) {
    auto it = groups.find(beta);
    if (it == groups.end()) {
      throw std::invalid_argument("no records for grid point beta=" + std::to_string(beta));
    }
    selected.insert(*it);
  }
  return curve_from_groups(selected);
}

DerivativeCurve derivative_curve(const PredictionCurve& curve) {
  const auto& x = curve.beta_labels;
  const auto& y = curve.mean_pred;
  if (x.size() < 3 || y.size() != x.size()) {
    throw std::invalid_argument("derivative needs at least 3 grid points");
  }
  DerivativeCurve out;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    out.beta.push_back(x[i]);
    out.d.push_back((y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]));
  }
  return out;
}

std::vector<double> box_smooth(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  if (window == 1) return {values.begin(), values.end()};
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += values[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

int default_smoothing_window(std::size_t points) { return points <= 5 ? 1 : 3; }

TransitionReport find_crossover(const DerivativeCurve& dcurve, int window, const std::string& method) {
  if (dcurve.d.empty() || dcurve.d.size() != dcurve.beta.size()) {
    throw std::invalid_argument("crossover search needs a nonempty derivative curve");
  }
  TransitionReport report;
  report.method = method;
  report.window = window < 0 ? default_smoothing_window(dcurve.d.size()) : window;
  if (dcurve.beta.size() > 1) {
    report.grid_step = (dcurve.beta.back() - dcurve.beta.front()) /
                       static_cast<double>(dcurve.beta.size() - 1);
  }
  const auto smooth = box_smooth(dcurve.d, report.window);
  const auto lo = std::min_element(smooth.begin(), smooth.end());
  const auto hi = std::max_element(smooth.begin(), smooth.end());
  if (*hi == *lo) {
    report.no_peak = true;
    report.beta_star = std::nan("");
    return report;
  }
  // max_element returns the first maximum, the smallest β on an ascending grid
  // (minmax_element would return the last one).
  report.beta_star = dcurve.beta[static_cast<std::size_t>(hi - smooth.begin())];
  return report;
}

double peak_dominance(const DerivativeCurve& dcurve, int window) {
  if (dcurve.d.empty()) throw std::invalid_argument("peak dominance needs a nonempty curve");
  const int w = window < 0 ? default_smoothing_window(dcurve.d.size()) : window;
  const auto s = box_smooth(dcurve.d, w);
  const std::size_t n = s.size();
  const double main = *std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end());
  if (main <= 0.0) return 0.0;
  // Topographic prominence of every other local maximum (plateaus count once):
  // height above the higher of the two minima separating it from taller ground.
  bool seen_main = false;
  double second = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    const bool left_ok = i == 0 || s[i - 1] < s[i];
    const bool right_ok = j + 1 == n || s[j + 1] < s[i];
    if (left_ok && right_ok) {
      double left_min = s[i];
      for (std::size_t k = i; k-- > 0 && s[k] <= s[i];) left_min = std::min(left_min, s[k]);
      double right_min = s[i];
      for (std::size_t k = j + 1; k < n && s[k] <= s[i]; ++k) right_min = std::min(right_min, s[k]);
      const bool is_main = s[i] - *std::min_element(s.begin(), s.end()) == main;
      if (is_main && !seen_main) {
        seen_main = true;
      } else {
        second = std::max(second, s[i] - std::max(left_min, right_min));
      }
    }
    i = j + 1;
  }
  return second / main;
}

TransitionReport ensemble_crossover(std::span<const double> beta_stars) {
  if (beta_stars.empty()) throw std::invalid_argument("ensemble needs at least one member");
  TransitionReport report;
  report.beta_star = mean(beta_stars);
  report.uncertainty = population_std(beta_stars);
  report.members = static_cast<int>(beta_stars.size());
  return report;
}

TransitionReport ensemble_crossover(std::span<const TransitionReport> members) {
  if (members.empty()) throw std::invalid_argument("ensemble needs at least one member");
  std::vector<double> stars;
  for (const auto& m : members) {
    if (m.no_peak) throw std::invalid_argument("ensemble member without a peak");
    stars.push_back(m.beta_star);
  }
  TransitionReport report = ensemble_crossover(stars);
  report.method = members.front().method;
  report.grid_step = members.front().grid_step;
  report.window = members.front().window;
  return report;
}

ScalingFit scaling_fit(std::span<const int> sizes, std::span<const double> beta_stars) {
  if (sizes.size() != beta_stars.size()) throw std::invalid_argument("sizes and beta* differ in length");
  if (sizes.size() < 3) throw std::invalid_argument("scaling fit needs at least 3 sizes");
  if (std::all_of(sizes.begin(), sizes.end(), [&](int s) { return s == sizes.front(); })) {
    throw std::invalid_argument("scaling fit is degenerate: all sizes equal");
  }
  ScalingFit fit;
  fit.sizes.assign(sizes.begin(), sizes.end());
  fit.beta_stars.assign(beta_stars.begin(), beta_stars.end());
  std::vector<double> x;
  for (int s : sizes) x.push_back(std::log(2.0 * s * s));
  const double mx = mean(x);
  const double my = mean(beta_stars);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (beta_stars[i] - my);
  }
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = beta_stars[i] - (fit.a + fit.b * x[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
    ss_tot += (beta_stars[i] - my) * (beta_stars[i] - my);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace topoprobe
