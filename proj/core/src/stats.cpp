#include "topoprobe/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace topoprobe {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance needs at least two samples");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

double population_std(std::span<const double> xs) {
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed,
                                std::span<const double> probabilities, double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi-square: observed and probabilities must match and be nonempty");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  if (total <= 0.0) throw std::invalid_argument("chi-square: no observations");

  // Impossible outcomes that were observed refute the hypothesis outright.
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probabilities[i] <= 0.0 && observed[i] > 0) {
      return ChiSquareResult{std::numeric_limits<double>::infinity(), 0, 0.0, 0};
    }
  }

  std::vector<double> exp_bins;
  std::vector<double> obs_bins;
  double e_acc = 0.0;
  double o_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    e_acc += probabilities[i] * total;
    o_acc += static_cast<double>(observed[i]);
    if (e_acc >= min_expected) {
      exp_bins.push_back(e_acc);
      obs_bins.push_back(o_acc);
      e_acc = 0.0;
      o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp_bins.empty()) {
      exp_bins.push_back(e_acc);
      obs_bins.push_back(o_acc);
    } else {
      exp_bins.back() += e_acc;
      obs_bins.back() += o_acc;
    }
  }

  ChiSquareResult result;
  result.bins = static_cast<int>(exp_bins.size());
  for (std::size_t i = 0; i < exp_bins.size(); ++i) {
    const double d = obs_bins[i] - exp_bins[i];
    result.statistic += d * d / exp_bins[i];
  }
  result.dof = result.bins - 1;
  if (result.dof < 1) {
    result.p_value = 1.0;
    return result;
  }
  boost::math::chi_squared dist(result.dof);
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

Estimate jackknife(std::span<const double> samples, int blocks,
                   const std::function<double(std::span<const double>)>& estimator) {
  if (blocks < 2) throw std::invalid_argument("jackknife needs at least two blocks");
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(blocks)) {
    throw std::invalid_argument("jackknife needs at least one sample per block");
  }
  const std::size_t block_len = n / static_cast<std::size_t>(blocks);
  const std::size_t used = block_len * static_cast<std::size_t>(blocks);
  const std::span<const double> kept = samples.first(used);

  Estimate out;
  out.value = estimator(kept);
  std::vector<double> reduced;
  reduced.reserve(used - block_len);
  std::vector<double> leave_one_out(blocks);
  for (int b = 0; b < blocks; ++b) {
    reduced.clear();
    const std::size_t lo = static_cast<std::size_t>(b) * block_len;
    reduced.insert(reduced.end(), kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(lo));
    reduced.insert(reduced.end(), kept.begin() + static_cast<std::ptrdiff_t>(lo + block_len),
                   kept.end());
    leave_one_out[b] = estimator(reduced);
  }
  const double m = mean(leave_one_out);
  double acc = 0.0;
  for (double v : leave_one_out) acc += (v - m) * (v - m);
  out.std_error = std::sqrt(acc * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
  return out;
}

}  // namespace topoprobe
