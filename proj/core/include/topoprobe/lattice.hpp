#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace topoprobe {

/// Pauli basis in which a classical ±1 string is expressed.
enum class Basis { z, x };

using Spin = std::int8_t;

/// Flag vector over plaquettes, vertices or bonds; nonzero entries are "set".
using SiteMask = std::vector<std::uint8_t>;

/// Incidence structure of an n×n periodic square lattice with spins on bonds.
///
/// Indexing (stable, part of the dataset format):
///   vertex (r, c)           -> r*n + c
///   plaquette (r, c)        -> r*n + c, the square with corners (r,c) and (r+1,c+1)
///   horizontal bond (r, c)  -> r*n + c,        joins vertex (r,c) to (r,c+1)
///   vertical bond (r, c)    -> n*n + r*n + c,  joins vertex (r,c) to (r+1,c)
/// All coordinates are taken modulo n. Plaquette (r,c) holds the bonds
/// h(r,c), h(r+1,c), v(r,c), v(r,c+1); vertex (r,c) holds h(r,c), h(r,c-1),
/// v(r,c), v(r-1,c). Read as a (2, n, n) tensor, a bond vector is channel 0 =
/// horizontal bonds and channel 1 = vertical bonds.
class LatticeGeometry {
 public:
  /// Throws std::invalid_argument for n < 2.
  explicit LatticeGeometry(int n);

  int n() const noexcept { return n_; }
  int bond_count() const noexcept { return 2 * n_ * n_; }
  int plaquette_count() const noexcept { return n_ * n_; }
  int vertex_count() const noexcept { return n_ * n_; }

  int horizontal_bond(int r, int c) const noexcept { return wrap(r) * n_ + wrap(c); }
  int vertical_bond(int r, int c) const noexcept { return n_ * n_ + wrap(r) * n_ + wrap(c); }
  int site(int r, int c) const noexcept { return wrap(r) * n_ + wrap(c); }

  std::span<const int, 4> plaquette_bonds(int p) const { return plaquette_bonds_.at(p); }
  std::span<const int, 4> vertex_bonds(int s) const { return vertex_bonds_.at(s); }
  std::span<const int, 2> bond_plaquettes(int b) const { return bond_plaquettes_.at(b); }
  std::span<const int, 2> bond_vertices(int b) const { return bond_vertices_.at(b); }

 private:
  int wrap(int k) const noexcept { return ((k % n_) + n_) % n_; }

  int n_;
  std::vector<std::array<int, 4>> plaquette_bonds_;
  std::vector<std::array<int, 4>> vertex_bonds_;
  std::vector<std::array<int, 2>> bond_plaquettes_;
  std::vector<std::array<int, 2>> bond_vertices_;
};

inline LatticeGeometry build_geometry(int n) { return LatticeGeometry(n); }

/// Classical ±1 string on the bonds, tagged with the basis it was measured in.
struct SpinConfig {
  std::vector<Spin> values;
  Basis basis = Basis::z;

  static SpinConfig all_up(const LatticeGeometry& g, Basis basis = Basis::z);
  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

/// Background field λ_i ∈ [-1, 1] on every bond.
struct FieldConfig {
  std::vector<double> lambdas;

  static FieldConfig uniform(const LatticeGeometry& g, double value);
};

/// Throws std::invalid_argument if the config has the wrong length or a value other than ±1.
void validate(const LatticeGeometry& g, const SpinConfig& c);
/// Throws std::invalid_argument if the field has the wrong length or |λ| > 1.
void validate(const LatticeGeometry& g, const FieldConfig& f);

/// Product of the four z-spins around plaquette p.
int plaquette_product(const LatticeGeometry& g, const SpinConfig& c, int p);

/// Product of the four x-spins at vertex s (the A_s eigenvalue).
int vertex_product(const LatticeGeometry& g, const SpinConfig& c, int s);

/// Flip every bond once per adjacent masked plaquette (action of Π B_p on an x string).
SpinConfig apply_plaquette_flips(const LatticeGeometry& g, const SpinConfig& c,
                                 std::span<const std::uint8_t> mask);

/// Flip every bond once per adjacent masked vertex (action of Π A_s on a z string).
SpinConfig apply_vertex_flips(const LatticeGeometry& g, const SpinConfig& c,
                              std::span<const std::uint8_t> mask);

/// Plaquettes whose z-product is -1, ascending. Empty iff all loops are closed.
std::vector<int> violated_plaquettes(const LatticeGeometry& g, const SpinConfig& c);

/// Vertices whose x-product is -1, ascending.
std::vector<int> violated_vertices(const LatticeGeometry& g, const SpinConfig& c);

/// Unpack the low `size` bits of `bits` into a mask.
SiteMask mask_from_bits(std::uint64_t bits, int size);

}  // namespace topoprobe
