#include "topoprobe/toric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "topoprobe/parallel.hpp"

namespace topoprobe {
namespace {

std::uint64_t bond_bits(std::span<const int, 4> bonds) {
  std::uint64_t bits = 0;
  for (int b : bonds) bits |= std::uint64_t{1} << b;
  return bits;
}

void require_bitmask_size(const LatticeGeometry& g) {
  if (g.bond_count() > 64) throw std::invalid_argument("enumeration needs 2n^2 <= 64");
}

// Bond bitmasks of the closed loops generated by vertex operators, one per
// element of G in g_from_index order.
std::vector<std::uint64_t> enumerate_loops(const LatticeGeometry& g) {
  require_bitmask_size(g);
  const std::uint64_t order = group_order(g);
  std::vector<std::uint64_t> vertex_bits(g.vertex_count());
  for (int s = 0; s < g.vertex_count(); ++s) vertex_bits[s] = bond_bits(g.vertex_bonds(s));
  std::vector<std::uint64_t> loops(order, 0);
  // Gray-code walk: consecutive elements differ by one vertex operator.
  std::uint64_t current = 0;
  std::uint64_t prev_gray = 0;
  loops[0] = 0;
  for (std::uint64_t k = 1; k < order; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const int changed = std::countr_zero(gray ^ prev_gray);
    current ^= vertex_bits[changed + 1];
    loops[gray] = current;
    prev_gray = gray;
  }
  return loops;
}

std::uint64_t plaquette_flip_bits(const LatticeGeometry& g, std::uint64_t plaquette_mask) {
  std::uint64_t flips = 0;
  for (int p = 0; p < g.plaquette_count(); ++p) {
    if ((plaquette_mask >> p) & 1U) flips ^= bond_bits(g.plaquette_bonds(p));
  }
  return flips;
}

double parse_paren_number(const std::string& name, const std::string& prefix) {
  const std::string inner = name.substr(prefix.size(), name.size() - prefix.size() - 1);
  std::size_t used = 0;
  const double value = std::stod(inner, &used);
  if (used != inner.size()) throw std::invalid_argument("bad number in preset '" + name + "'");
  return value;
}

bool has_form(const std::string& name, const std::string& prefix) {
  return name.size() > prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0 &&
         name.back() == ')';
}

}  // namespace

GroupElementH canonical_h(SiteMask plaquette_mask) {
  if (!plaquette_mask.empty() && plaquette_mask[0]) {
    for (auto& bit : plaquette_mask) bit = bit ? 0 : 1;
  }
  return GroupElementH{std::move(plaquette_mask)};
}

GroupElementG canonical_g(SiteMask vertex_mask) {
  if (!vertex_mask.empty() && vertex_mask[0]) {
    for (auto& bit : vertex_mask) bit = bit ? 0 : 1;
  }
  return GroupElementG{std::move(vertex_mask)};
}

std::uint64_t group_order(const LatticeGeometry& g) {
  if (g.plaquette_count() - 1 >= 63) throw std::invalid_argument("group too large to index");
  return std::uint64_t{1} << (g.plaquette_count() - 1);
}

GroupElementH h_from_index(const LatticeGeometry& g, std::uint64_t index) {
  if (index >= group_order(g)) throw std::out_of_range("group element index out of range");
  return GroupElementH{mask_from_bits(index << 1, g.plaquette_count())};
}

std::uint64_t h_index(const GroupElementH& h) {
  std::uint64_t index = 0;
  for (std::size_t k = 1; k < h.plaquette_mask.size(); ++k) {
    if (h.plaquette_mask[k]) index |= std::uint64_t{1} << (k - 1);
  }
  return index;
}

GroupElementG g_from_index(const LatticeGeometry& g, std::uint64_t index) {
  if (index >= group_order(g)) throw std::out_of_range("group element index out of range");
  return GroupElementG{mask_from_bits(index << 1, g.vertex_count())};
}

FieldConfig field_preset(const LatticeGeometry& g, const std::string& name) {
  const int n = g.n();
  FieldConfig f{std::vector<double>(g.bond_count(), 0.0)};
  auto position = [n](int b) {
    const int site = b % (n * n);
    return std::pair{site / n, site % n};
  };
  if (name == "zero") return f;
  if (name == "checkerboard(+1/-1)" || name == "checkerboard") {
    for (int b = 0; b < g.bond_count(); ++b) {
      const auto [r, c] = position(b);
      f.lambdas[b] = ((r + c) % 2 == 0) ? 1.0 : -1.0;
    }
    return f;
  }
  if (name == "half-zero") {
    for (int b = 0; b < g.bond_count(); ++b) {
      f.lambdas[b] = (position(b).second < n / 2) ? 1.0 : 0.0;
    }
    return f;
  }
  if (has_form(name, "uniform(")) {
    const double value = parse_paren_number(name, "uniform(");
    std::fill(f.lambdas.begin(), f.lambdas.end(), value);
    validate(g, f);
    return f;
  }
  if (has_form(name, "random(")) {
    const std::string inner = name.substr(7, name.size() - 8);
    std::size_t used = 0;
    const unsigned long long seed = std::stoull(inner, &used);
    if (used != inner.size()) throw std::invalid_argument("bad seed in preset '" + name + "'");
    Rng rng(seed);
    for (auto& l : f.lambdas) l = rng.uniform(-1.0, 1.0);
    return f;
  }
  throw std::invalid_argument("unknown field preset '" + name + "'");
}

SpinConfig sigma_x_config(const LatticeGeometry& g, const GroupElementH& h) {
  return apply_plaquette_flips(g, SpinConfig::all_up(g, Basis::x), h.plaquette_mask);
}

GroupElementH h_from_config(const LatticeGeometry& g, const SpinConfig& c) {
  validate(g, c);
  if (!violated_vertices(g, c).empty()) {
    throw std::invalid_argument("configuration violates a vertex constraint");
  }
  // Propagate θ from plaquette 0 (θ = +1) across bonds: θ_p' = θ_p σ_i.
  const int np = g.plaquette_count();
  std::vector<int> theta(np, 0);
  std::vector<int> queue{0};
  theta[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int p = queue[head];
    for (int b : g.plaquette_bonds(p)) {
      const auto adj = g.bond_plaquettes(b);
      const int q = adj[0] == p ? adj[1] : adj[0];
      if (theta[q] == 0) {
        theta[q] = theta[p] * c.values[b];
        queue.push_back(q);
      }
    }
  }
  SiteMask mask(np);
  for (int p = 0; p < np; ++p) mask[p] = theta[p] < 0 ? 1 : 0;
  return canonical_h(std::move(mask));
}

double field_energy(const LatticeGeometry& g, const FieldConfig& field, const GroupElementH& h) {
  const SpinConfig c = sigma_x_config(g, h);
  if (static_cast<int>(field.lambdas.size()) != g.bond_count()) {
    throw std::invalid_argument("field length does not match lattice");
  }
  double e = 0.0;
  for (int b = 0; b < g.bond_count(); ++b) e += field.lambdas[b] * c.values[b];
  return e;
}

PseudoSpinConfig map_to_ising(const LatticeGeometry& g, const GroupElementH& h) {
  if (static_cast<int>(h.plaquette_mask.size()) != g.plaquette_count()) {
    throw std::invalid_argument("group element size does not match lattice");
  }
  PseudoSpinConfig out{std::vector<int>(g.plaquette_count())};
  for (int p = 0; p < g.plaquette_count(); ++p) out.thetas[p] = h.plaquette_mask[p] ? -1 : 1;
  return out;
}

double ising_boltzmann_weight(const LatticeGeometry& g, const GroupElementH& h,
                              const ToricField& field) {
  const PseudoSpinConfig theta = map_to_ising(g, h);
  double exponent = 0.0;
  for (int b = 0; b < g.bond_count(); ++b) {
    const auto adj = g.bond_plaquettes(b);
    exponent += field.lambdas.lambdas.at(b) * theta.thetas[adj[0]] * theta.thetas[adj[1]];
  }
  return std::exp(field.beta * exponent);
}

// ---------------------------------------------------------------------------
// ExactToricOracle

ExactToricOracle::ExactToricOracle(const LatticeGeometry& g, ToricField field)
    : g_(g), field_(std::move(field)) {
  if (g.n() > 3) throw std::invalid_argument("exact toric oracle is limited to n <= 3");
  if (field_.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  validate(g_, field_.lambdas);
  const auto& lambdas = field_.lambdas.lambdas;
  const double beta = field_.beta;

  const std::uint64_t order = group_order(g_);
  energies_.resize(order);
  for (std::uint64_t idx = 0; idx < order; ++idx) {
    const std::uint64_t flips = plaquette_flip_bits(g_, idx << 1);
    double e = 0.0;
    for (int b = 0; b < g_.bond_count(); ++b) e += ((flips >> b) & 1U) ? -lambdas[b] : lambdas[b];
    energies_[idx] = e;
  }
  e_max_ = *std::max_element(energies_.begin(), energies_.end());
  double z = 0.0;
  for (double e : energies_) z += std::exp(beta * (e - e_max_));
  log_z_ = std::log(z);

  loops_ = enumerate_loops(g_);
  half_tanh_.resize(g_.bond_count());
  z_prefactor_ = 1.0;
  std::vector<double> full_tanh(g_.bond_count());
  for (int b = 0; b < g_.bond_count(); ++b) {
    const double a = 0.5 * beta * lambdas[b];
    half_tanh_[b] = std::tanh(a);
    full_tanh[b] = std::tanh(2.0 * a);
    z_prefactor_ *= std::cosh(a) * std::cosh(a) / std::cosh(2.0 * a);
  }
  double loop_total = 0.0;
  for (std::uint64_t loop : loops_) {
    double prod = 1.0;
    for (std::uint64_t bits = loop; bits; bits &= bits - 1) prod *= full_tanh[std::countr_zero(bits)];
    loop_total += prod;
  }
  z_denominator_ = static_cast<double>(loops_.size()) * loop_total;
}

double ExactToricOracle::sigma_x_probability(const GroupElementH& h) const {
  const std::uint64_t idx = h_index(canonical_h(h.plaquette_mask));
  return std::exp(field_.beta * (energies_.at(idx) - e_max_) - log_z_);
}

std::vector<double> ExactToricOracle::sigma_x_probabilities() const {
  std::vector<double> probs(energies_.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = std::exp(field_.beta * (energies_[i] - e_max_) - log_z_);
  }
  return probs;
}

double ExactToricOracle::chi_f() const {
  const auto probs = sigma_x_probabilities();
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * energies_[i];
  double var = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    var += probs[i] * (energies_[i] - m) * (energies_[i] - m);
  }
  return 0.25 * var;
}

double ExactToricOracle::stabilizer_expectation(int p) const {
  if (p < 0 || p >= g_.plaquette_count()) throw std::out_of_range("plaquette index out of range");
  const auto probs = sigma_x_probabilities();
  const std::uint64_t full = (std::uint64_t{1} << g_.plaquette_count()) - 1;
  double total = 0.0;
  for (std::uint64_t idx = 0; idx < probs.size(); ++idx) {
    std::uint64_t mask = (idx << 1) ^ (std::uint64_t{1} << p);
    if (mask & 1U) mask ^= full;
    const double partner = energies_[mask >> 1];
    total += probs[idx] * std::exp(0.5 * field_.beta * (partner - energies_[idx]));
  }
  return total;
}

double ExactToricOracle::sigma_z_probability(std::uint64_t flip_set) const {
  if (g_.bond_count() < 64 && (flip_set >> g_.bond_count()) != 0) {
    throw std::out_of_range("flip set has bits beyond the lattice");
  }
  double sum = 0.0;
  for (std::uint64_t loop : loops_) {
    double prod = 1.0;
    for (std::uint64_t bits = loop ^ flip_set; bits; bits &= bits - 1) {
      prod *= half_tanh_[std::countr_zero(bits)];
    }
    sum += prod;
  }
  return z_prefactor_ * sum * sum / z_denominator_;
}

double ExactToricOracle::sigma_z_probability(std::span<const std::uint8_t> bond_mask) const {
  if (static_cast<int>(bond_mask.size()) != g_.bond_count()) {
    throw std::invalid_argument("flip set must have one entry per bond");
  }
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < bond_mask.size(); ++b) {
    if (bond_mask[b]) bits |= std::uint64_t{1} << b;
  }
  return sigma_z_probability(bits);
}

// ---------------------------------------------------------------------------
// σx sampling

SigmaXChain::SigmaXChain(const LatticeGeometry& g, const ToricField& field, std::uint64_t seed)
    : g_(g),
      lambdas_(field.lambdas.lambdas),
      beta_(field.beta),
      rng_(seed),
      config_(SpinConfig::all_up(g, Basis::x)),
      energy_(0.0) {
  validate(g, field.lambdas);
  if (beta_ < 0.0) throw std::invalid_argument("beta must be >= 0");
  for (double l : lambdas_) energy_ += l;
}

double SigmaXChain::plaquette_field(int p) const {
  double local = 0.0;
  for (int b : g_.plaquette_bonds(p)) local += lambdas_[b] * config_.values[b];
  return local;
}

void SigmaXChain::step() {
  // Null move included for aperiodicity (see the IGT chain).
  const auto pick = rng_.below(static_cast<std::uint64_t>(g_.plaquette_count()) + 1);
  if (pick == static_cast<std::uint64_t>(g_.plaquette_count())) return;
  const int p = static_cast<int>(pick);
  const double delta = -2.0 * plaquette_field(p);
  if (delta < 0.0 && rng_.uniform() >= std::exp(beta_ * delta)) return;
  for (int b : g_.plaquette_bonds(p)) config_.values[b] = static_cast<Spin>(-config_.values[b]);
  energy_ += delta;
}

void SigmaXChain::run(long attempts) {
  for (long i = 0; i < attempts; ++i) step();
}

LabeledDataset sample_sigma_x(int n, const ToricField& field, int count, std::uint64_t seed,
                              ChainSchedule schedule) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const LatticeGeometry g(n);
  const ChainSchedule sched = schedule.resolved(g.plaquette_count());
  SigmaXChain chain(g, field, seed);
  chain.run(sched.therm_attempts);

  LabeledDataset out;
  out.meta.kind = ModelKind::toric_x;
  out.meta.n = n;
  out.meta.beta_grid = {field.beta};
  out.meta.per_beta = count;
  out.meta.seed = seed;
  out.meta.therm_attempts = sched.therm_attempts;
  out.meta.stride_attempts = sched.stride_attempts;
  out.labels.assign(count, field.beta);
  out.configs.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (i > 0) chain.run(sched.stride_attempts);
    out.configs.push_back(chain.config());
  }
  return out;
}

namespace {

template <typename SampleOne>
LabeledDataset sample_grid(std::span<const double> beta_grid, std::uint64_t master_seed,
                           int threads, SampleOne&& sample_one) {
  if (beta_grid.empty()) throw std::invalid_argument("beta grid is empty");
  std::vector<LabeledDataset> parts(beta_grid.size());
  parallel_for(beta_grid.size(), threads, [&](std::size_t i) {
    parts[i] = sample_one(beta_grid[i], chain_seed(master_seed, i, 0));
  });
  LabeledDataset out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out.append(parts[i]);
  out.meta.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  out.meta.seed = master_seed;
  return out;
}

}  // namespace

LabeledDataset sample_sigma_x_grid(int n, const FieldConfig& lambdas,
                                   std::span<const double> beta_grid, int per_beta,
                                   std::uint64_t master_seed, ChainSchedule schedule,
                                   int threads) {
  return sample_grid(beta_grid, master_seed, threads, [&](double beta, std::uint64_t seed) {
    return sample_sigma_x(n, ToricField{lambdas, beta}, per_beta, seed, schedule);
  });
}

// ---------------------------------------------------------------------------
// σz sampling

SigmaZLoopTable::SigmaZLoopTable(const LatticeGeometry& g, const ToricField& field) {
  if (g.n() > 4) throw std::invalid_argument("sigma-z sampling is limited to n <= 4");
  if (field.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  validate(g, field.lambdas);
  loops_ = enumerate_loops(g);
  half_tanh_.resize(g.bond_count());
  for (int b = 0; b < g.bond_count(); ++b) {
    half_tanh_[b] = std::tanh(0.5 * field.beta * field.lambdas.lambdas[b]);
  }
}

double SigmaZLoopTable::loop_sum(std::uint64_t flip_set) const {
  double sum = 0.0;
  for (std::uint64_t loop : loops_) {
    double prod = 1.0;
    for (std::uint64_t bits = loop ^ flip_set; bits; bits &= bits - 1) {
      prod *= half_tanh_[std::countr_zero(bits)];
    }
    sum += prod;
  }
  return sum;
}

SigmaZChain::SigmaZChain(const LatticeGeometry& g, const SigmaZLoopTable& table,
                         std::uint64_t seed)
    : g_(g),
      table_(table),
      rng_(seed),
      prod_(table.loops().size()),
      zeros_(table.loops().size()),
      scratch_prod_(table.loops().size()),
      scratch_zeros_(table.loops().size()) {
  refresh();
}

void SigmaZChain::refresh() {
  const auto loops = table_.loops();
  const auto t = table_.half_tanh();
  sum_ = 0.0;
  for (std::size_t k = 0; k < loops.size(); ++k) {
    double prod = 1.0;
    int zeros = 0;
    for (std::uint64_t bits = loops[k] ^ state_; bits; bits &= bits - 1) {
      const double factor = t[std::countr_zero(bits)];
      if (factor == 0.0) {
        ++zeros;
      } else {
        prod *= factor;
      }
    }
    prod_[k] = prod;
    zeros_[k] = zeros;
    if (zeros == 0) sum_ += prod;
  }
  accepted_since_refresh_ = 0;
}

void SigmaZChain::step() {
  const auto loops = table_.loops();
  const int bond = static_cast<int>(rng_.below(static_cast<std::uint64_t>(g_.bond_count())));
  const double t = table_.half_tanh()[bond];
  const std::uint64_t probe = state_ >> bond;
  double new_sum = 0.0;
  for (std::size_t k = 0; k < loops.size(); ++k) {
    const bool inside = (((loops[k] >> bond) ^ probe) & 1U) != 0;
    double prod = prod_[k];
    int zeros = zeros_[k];
    if (t == 0.0) {
      zeros += inside ? -1 : 1;
    } else {
      prod = inside ? prod / t : prod * t;
    }
    scratch_prod_[k] = prod;
    scratch_zeros_[k] = zeros;
    if (zeros == 0) new_sum += prod;
  }
  if (sum_ != 0.0) {
    const double ratio = (new_sum / sum_) * (new_sum / sum_);
    if (ratio < 1.0 && rng_.uniform() >= ratio) return;
  }
  prod_.swap(scratch_prod_);
  zeros_.swap(scratch_zeros_);
  state_ ^= std::uint64_t{1} << bond;
  sum_ = new_sum;
  if (++accepted_since_refresh_ >= 4L * g_.bond_count()) refresh();
}

void SigmaZChain::run(long attempts) {
  for (long i = 0; i < attempts; ++i) step();
}

std::uint64_t SigmaZChain::draw_sample() {
  const auto loops = table_.loops();
  return state_ ^ loops[rng_.below(loops.size())];
}

SpinConfig z_config_from_flips(const LatticeGeometry& g, std::uint64_t flip_set) {
  SpinConfig c = SpinConfig::all_up(g, Basis::z);
  for (int b = 0; b < g.bond_count() && b < 64; ++b) {
    if ((flip_set >> b) & 1U) c.values[b] = -1;
  }
  return c;
}

std::uint64_t flips_from_z_config(const SpinConfig& c) {
  if (c.values.size() > 64) throw std::invalid_argument("config too large for a bitmask");
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < c.values.size(); ++b) {
    if (c.values[b] < 0) bits |= std::uint64_t{1} << b;
  }
  return bits;
}

LabeledDataset sample_sigma_z(int n, const ToricField& field, int count, std::uint64_t seed,
                              ChainSchedule schedule) {
  if (n > 4) throw std::invalid_argument("sigma-z sampling is limited to n <= 4");
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const LatticeGeometry g(n);
  const ChainSchedule sched = schedule.resolved(g.bond_count());
  const SigmaZLoopTable table(g, field);
  SigmaZChain chain(g, table, seed);
  chain.run(sched.therm_attempts);

  LabeledDataset out;
  out.meta.kind = ModelKind::toric_z;
  out.meta.n = n;
  out.meta.beta_grid = {field.beta};
  out.meta.per_beta = count;
  out.meta.seed = seed;
  out.meta.therm_attempts = sched.therm_attempts;
  out.meta.stride_attempts = sched.stride_attempts;
  out.labels.assign(count, field.beta);
  out.configs.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (i > 0) chain.run(sched.stride_attempts);
    out.configs.push_back(z_config_from_flips(g, chain.draw_sample()));
  }
  return out;
}

LabeledDataset sample_sigma_z_grid(int n, const FieldConfig& lambdas,
                                   std::span<const double> beta_grid, int per_beta,
                                   std::uint64_t master_seed, ChainSchedule schedule,
                                   int threads) {
  if (n > 4) throw std::invalid_argument("sigma-z sampling is limited to n <= 4");
  return sample_grid(beta_grid, master_seed, threads, [&](double beta, std::uint64_t seed) {
    return sample_sigma_z(n, ToricField{lambdas, beta}, per_beta, seed, schedule);
  });
}

// ---------------------------------------------------------------------------
// Stabilizer expectations

Estimate stabilizer_expectation(int n, const ToricField& field, int p, int mc_samples,
                                std::uint64_t seed, ChainSchedule schedule) {
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  const LatticeGeometry g(n);
  if (p < 0 || p >= g.plaquette_count()) throw std::out_of_range("plaquette index out of range");
  const ChainSchedule sched = schedule.resolved(g.plaquette_count());
  SigmaXChain chain(g, field, seed);
  chain.run(sched.therm_attempts);
  std::vector<double> values(mc_samples);
  for (int s = 0; s < mc_samples; ++s) {
    if (s > 0) chain.run(sched.stride_attempts);
    values[s] = 1.0 / std::cosh(field.beta * chain.plaquette_field(p));
  }
  const auto avg = [](std::span<const double> xs) { return mean(xs); };
  if (mc_samples >= 40) return jackknife(values, 20, avg);
  Estimate out{mean(values), 0.0};
  if (mc_samples >= 2) out.std_error = std::sqrt(sample_variance(values) / mc_samples);
  return out;
}

std::vector<double> stabilizer_vector(SigmaXChain& chain, int mc_samples, long stride) {
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  const int np = chain.geometry().plaquette_count();
  std::vector<double> acc(np, 0.0);
  for (int s = 0; s < mc_samples; ++s) {
    chain.run(stride);
    for (int p = 0; p < np; ++p) acc[p] += 1.0 / std::cosh(chain.beta() * chain.plaquette_field(p));
  }
  for (auto& v : acc) v /= mc_samples;
  return acc;
}

LabeledDataset stabilizer_dataset(int n, const FieldConfig& lambdas,
                                  std::span<const double> beta_grid, int estimates_per_beta,
                                  int mc_samples, std::uint64_t master_seed,
                                  ChainSchedule schedule, int threads) {
  if (estimates_per_beta < 1) throw std::invalid_argument("estimates per beta must be >= 1");
  const LatticeGeometry g(n);
  const ChainSchedule sched = schedule.resolved(g.plaquette_count());
  LabeledDataset out = sample_grid(
      beta_grid, master_seed, threads, [&](double beta, std::uint64_t seed) {
        LabeledDataset part;
        part.meta.kind = ModelKind::stabilizer;
        part.meta.n = n;
        part.labels.assign(estimates_per_beta, beta);
        const ToricField field{lambdas, beta};
        if (mc_samples <= 0) {
          // Exact expectations; every record is identical.
          const ExactToricOracle oracle(g, field);
          std::vector<double> exact(g.plaquette_count());
          for (int p = 0; p < g.plaquette_count(); ++p) exact[p] = oracle.stabilizer_expectation(p);
          part.vectors.assign(estimates_per_beta, exact);
          return part;
        }
        SigmaXChain chain(g, field, seed);
        chain.run(sched.therm_attempts);
        part.vectors.reserve(estimates_per_beta);
        for (int e = 0; e < estimates_per_beta; ++e) {
          part.vectors.push_back(stabilizer_vector(chain, mc_samples, sched.stride_attempts));
        }
        return part;
      });
  out.meta.per_beta = estimates_per_beta;
  out.meta.mc_samples = mc_samples;
  out.meta.therm_attempts = sched.therm_attempts;
  out.meta.stride_attempts = sched.stride_attempts;
  return out;
}

}  // namespace topoprobe
