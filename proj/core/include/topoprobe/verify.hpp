#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topoprobe/nn.hpp"

namespace topoprobe {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Samplers and estimators against exact enumeration at n = 2, 3, plus a
/// finite-difference gradient check. Takes a few seconds.
std::vector<CheckResult> run_verification(std::uint64_t seed = 2024);

/// Largest relative difference between the analytic gradient and central
/// differences over `probes` random parameters (of `candidates`, or all).
/// Relative error is |a - f| / max(|a|, |f|, floor).
double gradient_check(NeuralNet& net, std::span<const double> inputs, std::span<const double> targets,
                      std::span<const std::size_t> candidates, int probes, std::uint64_t seed,
                      double step = 1e-5, double floor = 1e-6, bool train_mode = true,
                      std::uint64_t dropout_seed = 7);

}  // namespace topoprobe
