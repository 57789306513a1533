#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "topoprobe/dataset.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/rng.hpp"

namespace topoprobe {

/// Classical Ising gauge theory at inverse temperature beta, J = 1, k_B = 1.
struct IgtParams {
  double beta = 0.0;
  int n = 4;
};

/// Markov-chain schedule, in single-update attempts. Non-positive values
/// select the defaults: thermalization 100 sweeps, stride 1 sweep, where a
/// sweep is one attempt per update site.
///
/// `symmetrize` (IGT only): each stored configuration is mapped by a uniformly
/// random energy-preserving transformation (vertex flips and the two winding
/// loops). The Boltzmann weight is invariant under these, so the sampled
/// distribution is unchanged while frozen low-temperature chains stop
/// repeating one gauge copy.
struct ChainSchedule {
  long therm_attempts = 0;
  long stride_attempts = 0;
  bool symmetrize = true;

  ChainSchedule resolved(long sweep) const noexcept {
    return {therm_attempts > 0 ? therm_attempts : 100 * sweep,
            stride_attempts > 0 ? stride_attempts : sweep, symmetrize};
  }
};

/// E = -Σ_p Π_{i∈p} σ_i^z.
int igt_energy(const LatticeGeometry& g, const SpinConfig& c);

/// Metropolis acceptance min(1, exp(-beta * delta_e)).
double metropolis_acceptance(double beta, int delta_e);

/// Uniformly random element of the energy-preserving group applied to c.
SpinConfig random_symmetry(const LatticeGeometry& g, const SpinConfig& c, Rng& rng);

/// Single-spin-flip Metropolis chain with a hot start. `count` stored configs,
/// each `stride` attempts apart after `therm` attempts. Bit-identical for equal
/// arguments.
LabeledDataset sample_igt(const IgtParams& params, int count, std::uint64_t seed,
                          ChainSchedule schedule = {});

/// One independent chain per grid point, seeded chain_seed(master_seed, beta_index, 0).
LabeledDataset sample_igt_grid(int n, std::span<const double> beta_grid, int per_beta,
                               std::uint64_t master_seed, ChainSchedule schedule = {},
                               int threads = 1);

/// Exact Boltzmann statistics by enumerating all 2^(2n^2) configurations.
struct ExactIgtStats {
  double beta = 0.0;
  double mean_energy = 0.0;
  std::map<int, double> energy_histogram;  // energy -> probability
  std::map<int, std::uint64_t> degeneracy;  // energy -> number of configurations
};

/// Throws std::invalid_argument for n > 3.
ExactIgtStats exact_igt_oracle(int n, double beta);

}  // namespace topoprobe
