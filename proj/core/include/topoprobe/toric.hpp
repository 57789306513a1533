#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topoprobe/dataset.hpp"
#include "topoprobe/igt.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/rng.hpp"
#include "topoprobe/stats.hpp"

namespace topoprobe {

/// Product of plaquette operators, modulo Π_all B_p = 1.
/// Canonical representative: the bit of plaquette 0 is clear.
struct GroupElementH {
  SiteMask plaquette_mask;
  friend bool operator==(const GroupElementH&, const GroupElementH&) = default;
};

/// Product of vertex operators, modulo Π_all A_s = 1 (vertex 0 bit clear).
struct GroupElementG {
  SiteMask vertex_mask;
  friend bool operator==(const GroupElementG&, const GroupElementG&) = default;
};

/// Complement the mask if the plaquette-0 bit is set.
GroupElementH canonical_h(SiteMask plaquette_mask);
GroupElementG canonical_g(SiteMask vertex_mask);

/// |H| = |G| = 2^(n^2 - 1). Index bit k-1 encodes site k, k >= 1.
std::uint64_t group_order(const LatticeGeometry& g);
GroupElementH h_from_index(const LatticeGeometry& g, std::uint64_t index);
std::uint64_t h_index(const GroupElementH& h);
GroupElementG g_from_index(const LatticeGeometry& g, std::uint64_t index);

/// Background field and its amplitude.
struct ToricField {
  FieldConfig lambdas;
  double beta = 0.0;
};

/// Named field presets: "uniform(+1)", "uniform(0.5)" (or any "uniform(v)"),
/// "checkerboard(+1/-1)", "half-zero", "zero", "random(seed)".
///   checkerboard: λ = +1 on bonds at (r, c) with r + c even, -1 otherwise
///   half-zero:    λ = 1 on bonds with column c < n/2, 0 elsewhere
///   random(s):    λ uniform in [-1, 1] from Rng(s)
/// Throws std::invalid_argument for unknown names.
FieldConfig field_preset(const LatticeGeometry& g, const std::string& name);

/// x-basis configuration h|0_x>.
SpinConfig sigma_x_config(const LatticeGeometry& g, const GroupElementH& h);

/// Recover the canonical h with h|0_x> = c. Throws if c violates a vertex constraint.
GroupElementH h_from_config(const LatticeGeometry& g, const SpinConfig& c);

/// Σ_i λ_i σ_i^x(h).
double field_energy(const LatticeGeometry& g, const FieldConfig& field, const GroupElementH& h);

/// Pseudo-spin θ_p per plaquette.
struct PseudoSpinConfig {
  std::vector<int> thetas;
};

/// θ_p = -1 iff plaquette p is in h.
PseudoSpinConfig map_to_ising(const LatticeGeometry& g, const GroupElementH& h);

/// exp(β Σ_<p,p'> J_{pp'} θ_p θ_p') with J_{pp'} = λ of the shared bond.
double ising_boltzmann_weight(const LatticeGeometry& g, const GroupElementH& h,
                              const ToricField& field);

/// Exact projection statistics of the field-deformed toric-code ground state
/// by enumeration of the 2^(n^2-1) group elements (n <= 3).
class ExactToricOracle {
 public:
  /// Throws std::invalid_argument for n > 3 or beta < 0.
  ExactToricOracle(const LatticeGeometry& g, ToricField field);

  const LatticeGeometry& geometry() const noexcept { return g_; }
  const ToricField& field() const noexcept { return field_; }
  std::uint64_t order() const noexcept { return energies_.size(); }

  /// E(h) indexed by h_index.
  std::span<const double> energies() const noexcept { return energies_; }

  /// p(S_h) = e^{βE(h)} / Σ e^{βE}.
  double sigma_x_probability(const GroupElementH& h) const;
  std::vector<double> sigma_x_probabilities() const;

  /// Quarter variance of E(h) under sigma_x_probability.
  double chi_f() const;

  /// <B_p> = Σ_h p(h) e^{(β/2)(E(B_p h) - E(h))}.
  double stabilizer_expectation(int p) const;

  /// p(z_M) for flip set M (bit i = bond i flipped relative to |0_z>).
  double sigma_z_probability(std::uint64_t flip_set) const;
  double sigma_z_probability(std::span<const std::uint8_t> bond_mask) const;

  /// Closed loops C (bond bitmasks), one per element of G.
  std::span<const std::uint64_t> loops() const noexcept { return loops_; }

 private:
  LatticeGeometry g_;
  ToricField field_;
  std::vector<double> energies_;
  double log_z_ = 0.0;  // log Σ_h e^{β(E(h) - e_max)}
  double e_max_ = 0.0;
  std::vector<std::uint64_t> loops_;
  std::vector<double> half_tanh_;  // tanh(βλ_j / 2)
  double z_prefactor_ = 1.0;       // Π cosh²(βλ/2) / cosh(βλ)
  double z_denominator_ = 0.0;     // |G| Σ_C Π_{j∈C} tanh(βλ_j)
};

/// Metropolis chain over h ∈ H: pick a random plaquette, flip its four
/// x-spins with probability min(1, p(new)/p(old)). Starts from |0_x>.
class SigmaXChain {
 public:
  SigmaXChain(const LatticeGeometry& g, const ToricField& field, std::uint64_t seed);

  void step();
  void run(long attempts);

  const SpinConfig& config() const noexcept { return config_; }
  /// Σ_i λ_i σ_i^x of the current state (tracked incrementally).
  double energy() const noexcept { return energy_; }
  /// Σ_{i∈p} λ_i σ_i^x for plaquette p.
  double plaquette_field(int p) const;
  const LatticeGeometry& geometry() const noexcept { return g_; }
  double beta() const noexcept { return beta_; }

 private:
  const LatticeGeometry& g_;
  std::vector<double> lambdas_;
  double beta_;
  Rng rng_;
  SpinConfig config_;
  double energy_;
};

/// `count` x-basis samples at field.beta, labeled by field.beta.
LabeledDataset sample_sigma_x(int n, const ToricField& field, int count, std::uint64_t seed,
                              ChainSchedule schedule = {});

LabeledDataset sample_sigma_x_grid(int n, const FieldConfig& lambdas,
                                   std::span<const double> beta_grid, int per_beta,
                                   std::uint64_t master_seed, ChainSchedule schedule = {},
                                   int threads = 1);

/// Closed-loop table for σz sampling, n <= 4.
///
/// p(z_M) ∝ S(M)^2 with S(M) = Σ_C Π_{j∈C⊕M} tanh(βλ_j/2); loops C range over G.
class SigmaZLoopTable {
 public:
  /// Throws std::invalid_argument for n > 4.
  SigmaZLoopTable(const LatticeGeometry& g, const ToricField& field);

  std::span<const std::uint64_t> loops() const noexcept { return loops_; }
  std::span<const double> half_tanh() const noexcept { return half_tanh_; }
  /// S(M) evaluated from scratch.
  double loop_sum(std::uint64_t flip_set) const;

 private:
  std::vector<std::uint64_t> loops_;
  std::vector<double> half_tanh_;
};

/// Single-bond Metropolis chain on flip sets M, acceptance min(1, p(M')/p(M)),
/// with incremental O(|G|) loop-sum updates. p(z_M) is invariant under
/// M -> M ⊕ C for every closed loop C, so each stored sample is combined with
/// a uniformly random element of G.
class SigmaZChain {
 public:
  SigmaZChain(const LatticeGeometry& g, const SigmaZLoopTable& table, std::uint64_t seed);

  void step();
  void run(long attempts);
  /// Current state with a fresh uniform gauge loop applied.
  std::uint64_t draw_sample();

 private:
  void refresh();

  const LatticeGeometry& g_;
  const SigmaZLoopTable& table_;
  Rng rng_;
  std::uint64_t state_ = 0;
  std::vector<double> prod_;   // Π over nonzero factors of C⊕M
  std::vector<int> zeros_;     // number of zero factors in C⊕M
  std::vector<double> scratch_prod_;
  std::vector<int> scratch_zeros_;
  double sum_ = 0.0;
  long accepted_since_refresh_ = 0;
};

/// `count` z-basis samples (n <= 4), labeled by field.beta.
LabeledDataset sample_sigma_z(int n, const ToricField& field, int count, std::uint64_t seed,
                              ChainSchedule schedule = {});

LabeledDataset sample_sigma_z_grid(int n, const FieldConfig& lambdas,
                                   std::span<const double> beta_grid, int per_beta,
                                   std::uint64_t master_seed, ChainSchedule schedule = {},
                                   int threads = 1);

/// Convert a flip-set bitmask into a z-basis config (set bit -> spin -1).
SpinConfig z_config_from_flips(const LatticeGeometry& g, std::uint64_t flip_set);
std::uint64_t flips_from_z_config(const SpinConfig& c);

/// Monte Carlo <B_p> with h drawn from p(S_h). Each sample contributes
/// sech(β Σ_{i∈p} λ_i σ_i^x(h)), the pair-symmetrized form of
/// e^{(β/2)(E(B_p h) - E(h))}; both have the same mean, this one lies in [0, 1].
Estimate stabilizer_expectation(int n, const ToricField& field, int p, int mc_samples,
                                std::uint64_t seed, ChainSchedule schedule = {});

/// Per-plaquette estimates from `mc_samples` consecutive chain samples.
std::vector<double> stabilizer_vector(SigmaXChain& chain, int mc_samples, long stride);

/// `estimates_per_beta` records per grid point, each an n^2 vector of
/// independent <B_p> estimates. One chain per grid point.
LabeledDataset stabilizer_dataset(int n, const FieldConfig& lambdas,
                                  std::span<const double> beta_grid, int estimates_per_beta,
                                  int mc_samples, std::uint64_t master_seed,
                                  ChainSchedule schedule = {}, int threads = 1);

}  // namespace topoprobe
