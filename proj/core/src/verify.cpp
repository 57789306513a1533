#include "topoprobe/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "topoprobe/fidelity.hpp"
#include "topoprobe/igt.hpp"
#include "topoprobe/rng.hpp"
#include "topoprobe/stats.hpp"
#include "topoprobe/toric.hpp"

namespace topoprobe {
namespace {

constexpr double kMinP = 1e-3;

std::string describe(const ChiSquareResult& r) {
  std::ostringstream s;
  s << "chi2=" << r.statistic << " dof=" << r.dof << " p=" << r.p_value;
  return s.str();
}

CheckResult igt_check(std::uint64_t seed) {
  const double beta = 0.5;
  const LatticeGeometry g(2);
  const auto exact = exact_igt_oracle(2, beta);
  const auto ds = sample_igt(IgtParams{beta, 2}, 20000, seed, ChainSchedule{0, 10L * g.bond_count()});
  std::vector<double> probs;
  std::vector<std::uint64_t> counts;
  std::map<int, std::size_t> index;
  for (const auto& [e, p] : exact.energy_histogram) {
    index[e] = probs.size();
    probs.push_back(p);
    counts.push_back(0);
  }
  for (const auto& c : ds.configs) ++counts.at(index.at(igt_energy(g, c)));
  const auto r = chi_square_test(counts, probs);
  return {"igt_sampler_n2", r.p_value > kMinP, describe(r)};
}

CheckResult sigma_x_check(std::uint64_t seed) {
  const LatticeGeometry g(2);
  const ToricField field{field_preset(g, "uniform(1)"), 0.3};
  const ExactToricOracle oracle(g, field);
  const auto ds = sample_sigma_x(2, field, 20000, seed, ChainSchedule{0, 4L * g.plaquette_count()});
  std::vector<std::uint64_t> counts(oracle.order(), 0);
  for (const auto& c : ds.configs) ++counts.at(h_index(h_from_config(g, c)));
  const auto r = chi_square_test(counts, oracle.sigma_x_probabilities());
  return {"sigma_x_n2", r.p_value > kMinP, describe(r)};
}

CheckResult sigma_z_check(std::uint64_t seed) {
  const LatticeGeometry g(2);
  const ToricField field{field_preset(g, "uniform(1)"), 0.3};
  const ExactToricOracle oracle(g, field);
  const std::uint64_t outcomes = std::uint64_t{1} << g.bond_count();
  std::vector<double> probs(outcomes);
  double total = 0.0;
  for (std::uint64_t m = 0; m < outcomes; ++m) total += probs[m] = oracle.sigma_z_probability(m);
  const auto ds = sample_sigma_z(2, field, 20000, seed, ChainSchedule{0, 4L * g.bond_count()});
  std::vector<std::uint64_t> counts(outcomes, 0);
  for (const auto& c : ds.configs) ++counts.at(flips_from_z_config(c));
  const auto r = chi_square_test(counts, probs);
  const bool normalized = std::abs(total - 1.0) < 1e-10;
  return {"sigma_z_n2", normalized && r.p_value > kMinP,
          describe(r) + " table_sum=" + std::to_string(total)};
}

CheckResult ising_check(std::uint64_t seed) {
  double worst = 0.0;
  for (int n : {2, 3}) {
    const LatticeGeometry g(n);
    for (int f = 0; f < 5; ++f) {
      const ToricField field{field_preset(g, "random(" + std::to_string(seed + f) + ")"), 0.7};
      for (std::uint64_t i = 0; i < group_order(g); ++i) {
        const auto h = h_from_index(g, i);
        const double a = std::exp(field.beta * field_energy(g, field.lambdas, h));
        const double b = ising_boltzmann_weight(g, h, field);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
      }
    }
  }
  return {"ising_mapping", worst < 1e-12, "max_rel_error=" + std::to_string(worst)};
}

CheckResult chi_f_check(std::uint64_t seed) {
  const LatticeGeometry g(2);
  const FieldConfig lambdas = field_preset(g, "uniform(1)");
  const double beta = 0.4;
  const double exact = chi_f_exact(g, lambdas, beta);
  const auto mc = chi_f_mc(2, ToricField{lambdas, beta}, 20000, seed);
  const double z = std::abs(mc.value - exact) / mc.std_error;
  std::ostringstream s;
  s << "exact=" << exact << " mc=" << mc.value << " +- " << mc.std_error;
  return {"chi_f_n2", z < 4.0, s.str()};
}

CheckResult stabilizer_check() {
  const LatticeGeometry g(2);
  const ExactToricOracle oracle(g, ToricField{field_preset(g, "uniform(1)"), 0.0});
  double worst = 0.0;
  for (int p = 0; p < g.plaquette_count(); ++p) {
    worst = std::max(worst, std::abs(oracle.stabilizer_expectation(p) - 1.0));
  }
  return {"stabilizer_beta0", worst < 1e-12, "max_deviation=" + std::to_string(worst)};
}

CheckResult gradient_check_small(std::uint64_t seed) {
  ArchitectureDescriptor arch;
  arch.input = TensorShape{2, 3, 3};
  arch.layers = {LayerSpec{LayerKind::conv, 3, 2, 0.0}, LayerSpec{LayerKind::relu},
                 LayerSpec{LayerKind::flatten}, LayerSpec{LayerKind::dense, 4, 0, 0.0},
                 LayerSpec{LayerKind::dropout, 0, 0, 0.2}};
  NeuralNet net = nn_init(arch, seed);
  Rng rng(seed);
  std::vector<double> x(8 * 18);
  std::vector<double> y(8);
  for (double& v : x) v = rng.uniform(-1, 1);
  for (double& v : y) v = rng.uniform();
  const double err = gradient_check(net, x, y, {}, 60, seed);
  return {"nn_gradient", err < 1e-4, "max_rel_error=" + std::to_string(err)};
}

}  // namespace

double gradient_check(NeuralNet& net, std::span<const double> inputs, std::span<const double> targets,
                      std::span<const std::size_t> candidates, int probes, std::uint64_t seed,
                      double step, double floor, bool train_mode, std::uint64_t dropout_seed) {
  auto params = net.parameters();
  std::vector<double> grad(params.size());
  std::vector<double> scratch(params.size());
  net.loss_and_gradient(inputs, targets, grad, train_mode, dropout_seed);
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const std::size_t i = candidates.empty() ? rng.below(params.size())
                                             : candidates[rng.below(candidates.size())];
    const double saved = params[i];
    params[i] = saved + step;
    const double up = net.loss_and_gradient(inputs, targets, scratch, train_mode, dropout_seed);
    params[i] = saved - step;
    const double down = net.loss_and_gradient(inputs, targets, scratch, train_mode, dropout_seed);
    params[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), floor});
    worst = std::max(worst, rel);
  }
  return worst;
}

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  return {igt_check(seed),          sigma_x_check(seed + 1), sigma_z_check(seed + 2),
          ising_check(seed + 3),    chi_f_check(seed + 4),   stabilizer_check(),
          gradient_check_small(seed + 5)};
}

}  // namespace topoprobe
