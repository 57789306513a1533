#include "topoprobe/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace topoprobe {

LatticeGeometry::LatticeGeometry(int n) : n_(n) {
  if (n < 2) {
    throw std::invalid_argument("lattice size must be >= 2, got " + std::to_string(n));
  }
  const int sites = n * n;
  plaquette_bonds_.resize(sites);
  vertex_bonds_.resize(sites);
  bond_plaquettes_.resize(2 * sites);
  bond_vertices_.resize(2 * sites);

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int s = site(r, c);
      plaquette_bonds_[s] = {horizontal_bond(r, c), horizontal_bond(r + 1, c),
                             vertical_bond(r, c), vertical_bond(r, c + 1)};
      vertex_bonds_[s] = {horizontal_bond(r, c), horizontal_bond(r, c - 1),
                          vertical_bond(r, c), vertical_bond(r - 1, c)};
      bond_plaquettes_[horizontal_bond(r, c)] = {site(r, c), site(r - 1, c)};
      bond_plaquettes_[vertical_bond(r, c)] = {site(r, c), site(r, c - 1)};
      bond_vertices_[horizontal_bond(r, c)] = {site(r, c), site(r, c + 1)};
      bond_vertices_[vertical_bond(r, c)] = {site(r, c), site(r + 1, c)};
    }
  }
}

SpinConfig SpinConfig::all_up(const LatticeGeometry& g, Basis basis) {
  return SpinConfig{std::vector<Spin>(g.bond_count(), Spin{1}), basis};
}

FieldConfig FieldConfig::uniform(const LatticeGeometry& g, double value) {
  return FieldConfig{std::vector<double>(g.bond_count(), value)};
}

void validate(const LatticeGeometry& g, const SpinConfig& c) {
  if (static_cast<int>(c.values.size()) != g.bond_count()) {
    throw std::invalid_argument("spin config has " + std::to_string(c.values.size()) +
                                " entries, lattice has " + std::to_string(g.bond_count()) +
                                " bonds");
  }
  for (Spin s : c.values) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1");
  }
}

void validate(const LatticeGeometry& g, const FieldConfig& f) {
  if (static_cast<int>(f.lambdas.size()) != g.bond_count()) {
    throw std::invalid_argument("field has " + std::to_string(f.lambdas.size()) +
                                " entries, lattice has " + std::to_string(g.bond_count()) +
                                " bonds");
  }
  for (double l : f.lambdas) {
    if (!(std::abs(l) <= 1.0)) throw std::invalid_argument("field values must lie in [-1, 1]");
  }
}

namespace {

void check_length(const LatticeGeometry& g, const SpinConfig& c) {
  if (static_cast<int>(c.values.size()) != g.bond_count()) {
    throw std::invalid_argument("spin config length does not match lattice");
  }
}

void check_mask(std::span<const std::uint8_t> mask, int expected) {
  if (static_cast<int>(mask.size()) != expected) {
    throw std::invalid_argument("mask has " + std::to_string(mask.size()) + " entries, expected " +
                                std::to_string(expected));
  }
}

int product(const SpinConfig& c, std::span<const int, 4> bonds) {
  int prod = 1;
  for (int b : bonds) prod *= c.values[b];
  return prod;
}

}  // namespace

int plaquette_product(const LatticeGeometry& g, const SpinConfig& c, int p) {
  check_length(g, c);
  if (p < 0 || p >= g.plaquette_count()) throw std::out_of_range("plaquette index out of range");
  if (c.basis != Basis::z) throw std::invalid_argument("plaquette product needs a z-basis config");
  return product(c, g.plaquette_bonds(p));
}

int vertex_product(const LatticeGeometry& g, const SpinConfig& c, int s) {
  check_length(g, c);
  if (s < 0 || s >= g.vertex_count()) throw std::out_of_range("vertex index out of range");
  if (c.basis != Basis::x) throw std::invalid_argument("vertex product needs an x-basis config");
  return product(c, g.vertex_bonds(s));
}

SpinConfig apply_plaquette_flips(const LatticeGeometry& g, const SpinConfig& c,
                                 std::span<const std::uint8_t> mask) {
  check_length(g, c);
  check_mask(mask, g.plaquette_count());
  SpinConfig out = c;
  for (int p = 0; p < g.plaquette_count(); ++p) {
    if (!mask[p]) continue;
    for (int b : g.plaquette_bonds(p)) out.values[b] = static_cast<Spin>(-out.values[b]);
  }
  return out;
}

SpinConfig apply_vertex_flips(const LatticeGeometry& g, const SpinConfig& c,
                              std::span<const std::uint8_t> mask) {
  check_length(g, c);
  check_mask(mask, g.vertex_count());
  SpinConfig out = c;
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (!mask[s]) continue;
    for (int b : g.vertex_bonds(s)) out.values[b] = static_cast<Spin>(-out.values[b]);
  }
  return out;
}

std::vector<int> violated_plaquettes(const LatticeGeometry& g, const SpinConfig& c) {
  std::vector<int> out;
  for (int p = 0; p < g.plaquette_count(); ++p) {
    if (plaquette_product(g, c, p) < 0) out.push_back(p);
  }
  return out;
}

std::vector<int> violated_vertices(const LatticeGeometry& g, const SpinConfig& c) {
  std::vector<int> out;
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (vertex_product(g, c, s) < 0) out.push_back(s);
  }
  return out;
}

SiteMask mask_from_bits(std::uint64_t bits, int size) {
  if (size < 0 || size > 64) throw std::invalid_argument("bit mask size must be in [0, 64]");
  SiteMask mask(size);
  for (int i = 0; i < size; ++i) mask[i] = static_cast<std::uint8_t>((bits >> i) & 1U);
  return mask;
}

}  // namespace topoprobe
