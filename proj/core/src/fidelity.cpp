#include "topoprobe/fidelity.hpp"

#include <cmath>
#include <stdexcept>

#include "topoprobe/parallel.hpp"
#include "topoprobe/rng.hpp"

namespace topoprobe {

double chi_f_exact(const LatticeGeometry& g, const FieldConfig& lambdas, double beta) {
  return ExactToricOracle(g, ToricField{lambdas, beta}).chi_f();
}

Estimate chi_f_mc(int n, const ToricField& field, int mc_samples, std::uint64_t seed,
                  ChainSchedule schedule) {
  if (mc_samples < 2) throw std::invalid_argument("chi_f_mc needs at least two samples");
  const LatticeGeometry g(n);
  const ChainSchedule sched = schedule.resolved(g.plaquette_count());
  SigmaXChain chain(g, field, seed);
  chain.run(sched.therm_attempts);
  std::vector<double> energies(mc_samples);
  for (int s = 0; s < mc_samples; ++s) {
    if (s > 0) chain.run(sched.stride_attempts);
    energies[s] = chain.energy();
  }
  const auto quarter_variance = [](std::span<const double> xs) {
    return 0.25 * sample_variance(xs);
  };
  if (mc_samples >= 40) return jackknife(energies, 20, quarter_variance);
  return Estimate{quarter_variance(energies), 0.0};
}

ChiFCurve chi_f_curve_exact(const LatticeGeometry& g, const FieldConfig& lambdas,
                            std::span<const double> beta_grid) {
  ChiFCurve curve;
  curve.method = "exact";
  curve.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  for (double beta : beta_grid) curve.chi_values.push_back(chi_f_exact(g, lambdas, beta));
  curve.std_errors.assign(beta_grid.size(), 0.0);
  return curve;
}

ChiFCurve chi_f_curve_mc(int n, const FieldConfig& lambdas, std::span<const double> beta_grid,
                         int mc_samples, std::uint64_t master_seed, ChainSchedule schedule,
                         int threads) {
  ChiFCurve curve;
  curve.method = "mc";
  curve.mc_samples = mc_samples;
  curve.seed = master_seed;
  curve.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  curve.chi_values.resize(beta_grid.size());
  curve.std_errors.resize(beta_grid.size());
  parallel_for(beta_grid.size(), threads, [&](std::size_t i) {
    const Estimate e = chi_f_mc(n, ToricField{lambdas, beta_grid[i]}, mc_samples,
                                chain_seed(master_seed, i, 0), schedule);
    curve.chi_values[i] = e.value;
    curve.std_errors[i] = e.std_error;
  });
  return curve;
}

double chi_f_peak(const ChiFCurve& curve) {
  if (curve.chi_values.empty() || curve.chi_values.size() != curve.beta_grid.size()) {
    throw std::invalid_argument("chi_f curve is empty or malformed");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.chi_values.size(); ++i) {
    if (curve.chi_values[i] > curve.chi_values[best]) best = i;
  }
  return curve.beta_grid[best];
}

}  // namespace topoprobe
