#include "topoprobe/igt.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "topoprobe/parallel.hpp"
#include "topoprobe/rng.hpp"

namespace topoprobe {

int igt_energy(const LatticeGeometry& g, const SpinConfig& c) {
  int energy = 0;
  for (int p = 0; p < g.plaquette_count(); ++p) energy -= plaquette_product(g, c, p);
  return energy;
}

double metropolis_acceptance(double beta, int delta_e) {
  if (delta_e <= 0) return 1.0;
  return std::exp(-beta * static_cast<double>(delta_e));
}

namespace {

class IgtChain {
 public:
  IgtChain(const LatticeGeometry& g, double beta, Rng& rng)
      : g_(g), rng_(rng), spins_(g.bond_count()), plaq_(g.plaquette_count()) {
    // A bond touches two plaquettes, so ΔE ∈ {-4, 0, +4}.
    accept_up_ = metropolis_acceptance(beta, 4);
    for (auto& s : spins_) s = rng_.coin() ? Spin{1} : Spin{-1};
    for (int p = 0; p < g.plaquette_count(); ++p) {
      int prod = 1;
      for (int b : g.plaquette_bonds(p)) prod *= spins_[b];
      plaq_[p] = static_cast<Spin>(prod);
    }
  }

  // The proposal includes a null move. Without it every attempt at β = 0 flips
  // exactly one bond, so the bond parity alternates and the chain is periodic.
  void step() {
    const auto pick = rng_.below(spins_.size() + 1);
    if (pick == spins_.size()) return;
    const int b = static_cast<int>(pick);
    const auto adj = g_.bond_plaquettes(b);
    const int delta_e = 2 * (plaq_[adj[0]] + plaq_[adj[1]]);
    if (delta_e > 0 && rng_.uniform() >= accept_up_) return;
    spins_[b] = static_cast<Spin>(-spins_[b]);
    plaq_[adj[0]] = static_cast<Spin>(-plaq_[adj[0]]);
    plaq_[adj[1]] = static_cast<Spin>(-plaq_[adj[1]]);
  }

  void run(long attempts) {
    for (long i = 0; i < attempts; ++i) step();
  }

  const std::vector<Spin>& spins() const { return spins_; }

 private:
  const LatticeGeometry& g_;
  Rng& rng_;
  std::vector<Spin> spins_;
  std::vector<Spin> plaq_;
  double accept_up_;
};

}  // namespace

LabeledDataset sample_igt(const IgtParams& params, int count, std::uint64_t seed,
                          ChainSchedule schedule) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  if (params.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  const LatticeGeometry g(params.n);
  const ChainSchedule sched = schedule.resolved(g.bond_count());

  Rng rng(seed);
  IgtChain chain(g, params.beta, rng);
  chain.run(sched.therm_attempts);

  LabeledDataset out;
  out.meta.kind = ModelKind::igt;
  out.meta.n = params.n;
  out.meta.beta_grid = {params.beta};
  out.meta.per_beta = count;
  out.meta.seed = seed;
  out.meta.therm_attempts = sched.therm_attempts;
  out.meta.stride_attempts = sched.stride_attempts;
  out.meta.symmetrized = sched.symmetrize;
  out.labels.assign(count, params.beta);
  out.configs.reserve(count);
  Rng sym_rng(chain_seed(seed, 1, 1));
  for (int i = 0; i < count; ++i) {
    if (i > 0) chain.run(sched.stride_attempts);
    SpinConfig c{chain.spins(), Basis::z};
    out.configs.push_back(sched.symmetrize ? random_symmetry(g, c, sym_rng) : std::move(c));
  }
  return out;
}

SpinConfig random_symmetry(const LatticeGeometry& g, const SpinConfig& c, Rng& rng) {
  SiteMask vertices(static_cast<std::size_t>(g.vertex_count()));
  for (auto& v : vertices) v = rng.coin() ? 1 : 0;
  SpinConfig out = apply_vertex_flips(g, c, vertices);
  const int n = g.n();
  if (rng.coin()) {
    for (int r = 0; r < n; ++r) out.values[g.horizontal_bond(r, 0)] = static_cast<Spin>(-out.values[g.horizontal_bond(r, 0)]);
  }
  if (rng.coin()) {
    for (int col = 0; col < n; ++col) {
      out.values[g.vertical_bond(0, col)] = static_cast<Spin>(-out.values[g.vertical_bond(0, col)]);
    }
  }
  return out;
}

LabeledDataset sample_igt_grid(int n, std::span<const double> beta_grid, int per_beta,
                               std::uint64_t master_seed, ChainSchedule schedule, int threads) {
  if (beta_grid.empty()) throw std::invalid_argument("beta grid is empty");
  std::vector<LabeledDataset> parts(beta_grid.size());
  parallel_for(beta_grid.size(), threads, [&](std::size_t i) {
    parts[i] = sample_igt(IgtParams{beta_grid[i], n}, per_beta, chain_seed(master_seed, i, 0),
                          schedule);
  });
  LabeledDataset out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out.append(parts[i]);
  out.meta.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  out.meta.seed = master_seed;
  return out;
}

ExactIgtStats exact_igt_oracle(int n, double beta) {
  if (n > 3) throw std::invalid_argument("exact IGT enumeration is limited to n <= 3");
  const LatticeGeometry g(n);
  std::vector<std::uint64_t> plaquette_bits(g.plaquette_count(), 0);
  for (int p = 0; p < g.plaquette_count(); ++p) {
    for (int b : g.plaquette_bonds(p)) plaquette_bits[p] |= std::uint64_t{1} << b;
  }
  ExactIgtStats stats;
  stats.beta = beta;
  const std::uint64_t states = std::uint64_t{1} << g.bond_count();
  for (std::uint64_t s = 0; s < states; ++s) {
    // Set bit = spin down.
    int energy = 0;
    for (auto bits : plaquette_bits) energy += (std::popcount(s & bits) & 1) ? 1 : -1;
    ++stats.degeneracy[energy];
  }
  // Weights relative to the ground-state energy -n^2 keep the exponent <= 0.
  const int e0 = -g.plaquette_count();
  double z = 0.0;
  for (const auto& [e, count] : stats.degeneracy) {
    z += static_cast<double>(count) * std::exp(-beta * (e - e0));
  }
  for (const auto& [e, count] : stats.degeneracy) {
    const double prob = static_cast<double>(count) * std::exp(-beta * (e - e0)) / z;
    stats.energy_histogram[e] = prob;
    stats.mean_energy += prob * e;
  }
  return stats;
}

}  // namespace topoprobe
