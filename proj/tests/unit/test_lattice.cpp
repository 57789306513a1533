#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/rng.hpp"

using namespace topoprobe;
using testutil::config_from_bits;

TEST_SUITE("lattice") {

TEST_CASE("sizes") {
  LatticeGeometry g2(2);
  CHECK(g2.bond_count() == 8);
  CHECK(g2.plaquette_count() == 4);
  CHECK(g2.vertex_count() == 4);
  CHECK(LatticeGeometry(4).bond_count() == 32);
  CHECK_THROWS_AS(LatticeGeometry(1), std::invalid_argument);
}

TEST_CASE("incidence matches the documented indexing for n in 2..32") {
  for (int n = 2; n <= 32; ++n) {
    LatticeGeometry g(n);
    std::vector<int> plaquette_hits(g.bond_count(), 0), vertex_hits(g.bond_count(), 0);
    for (int p = 0; p < g.plaquette_count(); ++p) {
      auto bonds = g.plaquette_bonds(p);
      auto expect = oracle::plaquette(n, p);
      REQUIRE(std::equal(bonds.begin(), bonds.end(), expect.begin()));
      for (int b : bonds) {
        ++plaquette_hits[b];
        auto ps = g.bond_plaquettes(b);
        CHECK((ps[0] == p || ps[1] == p));
      }
    }
    for (int s = 0; s < g.vertex_count(); ++s) {
      auto bonds = g.vertex_bonds(s);
      auto expect = oracle::star(n, s);
      REQUIRE(std::equal(bonds.begin(), bonds.end(), expect.begin()));
      for (int b : bonds) {
        ++vertex_hits[b];
        auto vs = g.bond_vertices(b);
        CHECK((vs[0] == s || vs[1] == s));
      }
    }
    CHECK(std::all_of(plaquette_hits.begin(), plaquette_hits.end(), [](int k) { return k == 2; }));
    CHECK(std::all_of(vertex_hits.begin(), vertex_hits.end(), [](int k) { return k == 2; }));
  }
}

TEST_CASE("XOR of all plaquette bond sets is empty at n=3") {
  LatticeGeometry g(3);
  std::vector<int> parity(g.bond_count(), 0);
  for (int p = 0; p < g.plaquette_count(); ++p)
    for (int b : g.plaquette_bonds(p)) parity[b] ^= 1;
  CHECK(std::count(parity.begin(), parity.end(), 1) == 0);
}

TEST_CASE("plaquette product") {
  LatticeGeometry g(2);
  auto up = SpinConfig::all_up(g);
  for (int p = 0; p < 4; ++p) {
    CHECK(plaquette_product(g, up, p) == 1);
    auto c = up;
    c.values[g.plaquette_bonds(p)[2]] = -1;
    CHECK(plaquette_product(g, c, p) == -1);
  }
  SpinConfig c{{+1, -1, -1, +1, +1, +1, -1, -1}, Basis::z};
  int expect = 1;
  for (int b : oracle::plaquette(2, 0)) expect *= c.values[b];
  CHECK(plaquette_product(g, c, 0) == expect);
  CHECK_THROWS_AS(validate(g, SpinConfig{{1, 1, 1}, Basis::z}), std::invalid_argument);
  CHECK_THROWS_AS(validate(g, SpinConfig{{1, 1, 1, 1, 1, 1, 1, 0}, Basis::z}), std::invalid_argument);
}

TEST_CASE("vertex product") {
  LatticeGeometry g(2);
  auto up = SpinConfig::all_up(g, Basis::x);
  for (int s = 0; s < 4; ++s) {
    CHECK(vertex_product(g, up, s) == 1);
    auto c = up;
    c.values[g.vertex_bonds(s)[1]] = -1;
    CHECK(vertex_product(g, c, s) == -1);
  }
  // Every plaquette-flip pattern keeps all vertex constraints.
  for (std::uint64_t m = 0; m < 16; ++m) {
    auto c = apply_plaquette_flips(g, up, mask_from_bits(m, 4));
    for (int s = 0; s < 4; ++s) CHECK(vertex_product(g, c, s) == 1);
  }
}

TEST_CASE("plaquette and vertex flips") {
  LatticeGeometry g(2);
  auto up = SpinConfig::all_up(g);
  CHECK(apply_plaquette_flips(g, up, SiteMask(4, 0)) == up);
  CHECK(apply_plaquette_flips(g, up, SiteMask(4, 1)) == up);
  CHECK(apply_vertex_flips(g, up, SiteMask(4, 0)) == up);
  CHECK(apply_vertex_flips(g, up, SiteMask(4, 1)) == up);
  auto p0 = apply_plaquette_flips(g, up, mask_from_bits(1, 4));
  CHECK(testutil::bits_from_config(p0) == oracle::flips(2, 1, false));
  auto s0 = apply_vertex_flips(g, up, mask_from_bits(1, 4));
  CHECK(testutil::bits_from_config(s0) == oracle::flips(2, 1, true));
  // Exhaustive n=2 agreement with the reference flip sets.
  for (std::uint64_t m = 0; m < 16; ++m) {
    CHECK(testutil::bits_from_config(apply_plaquette_flips(g, up, mask_from_bits(m, 4))) ==
          oracle::flips(2, m, false));
    CHECK(testutil::bits_from_config(apply_vertex_flips(g, up, mask_from_bits(m, 4))) ==
          oracle::flips(2, m, true));
  }
}

TEST_CASE("flip actions compose as XOR") {
  Rng rng(11);
  for (int n : {2, 3, 5}) {
    LatticeGeometry g(n);
    for (int trial = 0; trial < 50; ++trial) {
      SpinConfig c = SpinConfig::all_up(g);
      for (auto& s : c.values) s = rng.coin() ? 1 : -1;
      SiteMask a(n * n), b(n * n), x(n * n);
      for (int k = 0; k < n * n; ++k) {
        a[k] = rng.coin();
        b[k] = rng.coin();
        x[k] = a[k] ^ b[k];
      }
      CHECK(apply_plaquette_flips(g, apply_plaquette_flips(g, c, a), b) ==
            apply_plaquette_flips(g, c, x));
      CHECK(apply_vertex_flips(g, apply_vertex_flips(g, c, a), b) == apply_vertex_flips(g, c, x));
    }
  }
}

TEST_CASE("violated plaquettes") {
  LatticeGeometry g(3);
  auto up = SpinConfig::all_up(g);
  CHECK(violated_plaquettes(g, up).empty());
  for (int b = 0; b < g.bond_count(); ++b) {
    auto c = up;
    c.values[b] = -1;
    auto v = violated_plaquettes(g, c);
    auto expect = g.bond_plaquettes(b);
    std::set<int> want(expect.begin(), expect.end());
    CHECK(std::set<int>(v.begin(), v.end()) == want);
  }
}

TEST_CASE("violation count is even and gauge invariant, exhaustive at n=2") {
  LatticeGeometry g(2);
  for (std::uint64_t bits = 0; bits < 256; ++bits) {
    auto c = config_from_bits(g, bits);
    auto v = violated_plaquettes(g, c);
    CHECK(v.size() % 2 == 0);
    for (std::uint64_t m = 0; m < 16; ++m)
      CHECK(violated_plaquettes(g, apply_vertex_flips(g, c, mask_from_bits(m, 4))) == v);
  }
}

TEST_CASE("gauge invariance of violated plaquettes at n=3 (sampled)") {
  LatticeGeometry g(3);
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    auto c = config_from_bits(g, rng.below(std::uint64_t{1} << 18));
    auto v = violated_plaquettes(g, c);
    CHECK(v.size() % 2 == 0);
    CHECK(violated_plaquettes(g, apply_vertex_flips(g, c, mask_from_bits(rng.below(512), 9))) == v);
  }
}

TEST_CASE("violated vertices") {
  LatticeGeometry g(2);
  auto up = SpinConfig::all_up(g, Basis::x);
  CHECK(violated_vertices(g, up).empty());
  auto c = up;
  c.values[0] = -1;
  CHECK(violated_vertices(g, c).size() == 2);
}

}  // TEST_SUITE
