#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topoprobe/igt.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/stats.hpp"
#include "topoprobe/toric.hpp"

namespace topoprobe {

/// Fidelity susceptibility χ_F(β) on a grid.
struct ChiFCurve {
  std::vector<double> beta_grid;
  std::vector<double> chi_values;
  std::vector<double> std_errors;  // zero for exact curves
  std::string method;              // "mc" or "exact"
  int mc_samples = 0;
  std::uint64_t seed = 0;
};

/// χ_F = (1/4) Var E(h) under p(S_h), by enumeration (n <= 3).
double chi_f_exact(const LatticeGeometry& g, const FieldConfig& lambdas, double beta);

/// Quarter sample variance of E(h) over σx-chain samples, with a 20-block
/// jackknife error. Requires mc_samples >= 2.
Estimate chi_f_mc(int n, const ToricField& field, int mc_samples, std::uint64_t seed,
                  ChainSchedule schedule = {});

ChiFCurve chi_f_curve_exact(const LatticeGeometry& g, const FieldConfig& lambdas,
                            std::span<const double> beta_grid);

/// Grid point i uses chain_seed(master_seed, i, 0).
ChiFCurve chi_f_curve_mc(int n, const FieldConfig& lambdas, std::span<const double> beta_grid,
                         int mc_samples, std::uint64_t master_seed, ChainSchedule schedule = {},
                         int threads = 1);

/// β at the maximum of the curve; ties go to the smaller β.
double chi_f_peak(const ChiFCurve& curve);

}  // namespace topoprobe
