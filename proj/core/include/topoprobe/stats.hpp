#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace topoprobe {

double mean(std::span<const double> xs);
/// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> xs);
/// Population (n) standard deviation.
double population_std(std::span<const double> xs);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;  // after pooling
};

/// Pearson goodness-of-fit of observed counts against exact probabilities.
///
/// Bins with expected count below `min_expected` are pooled (in index order)
/// until the pool reaches it; a trailing under-filled pool is merged into the
/// last full bin. Bins with zero probability must have zero observations,
/// otherwise the p-value is 0.
ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed,
                                std::span<const double> probabilities,
                                double min_expected = 5.0);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Delete-one-block jackknife of an arbitrary estimator over contiguous blocks.
Estimate jackknife(std::span<const double> samples, int blocks,
                   const std::function<double(std::span<const double>)>& estimator);

}  // namespace topoprobe
