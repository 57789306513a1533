#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "topoprobe/stats.hpp"
#include "topoprobe/toric.hpp"

using namespace topoprobe;
using testutil::bits_from_config;

namespace {

FieldConfig random_field(const LatticeGeometry& g, Rng& rng) {
  FieldConfig f{std::vector<double>(g.bond_count())};
  for (auto& l : f.lambdas) l = rng.uniform(-1.0, 1.0);
  return f;
}

GroupElementH single_plaquette(const LatticeGeometry& g, int p) {
  SiteMask m(g.plaquette_count(), 0);
  m[p] = 1;
  return canonical_h(m);
}

}  // namespace

TEST_SUITE("toric") {

TEST_CASE("group H acts freely") {
  for (int n : {2, 3}) {
    LatticeGeometry g(n);
    CHECK(group_order(g) == (std::uint64_t{1} << (n * n - 1)));
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < group_order(g); ++k) {
      auto h = h_from_index(g, k);
      CHECK(h_index(h) == k);
      auto c = sigma_x_config(g, h);
      seen.insert(bits_from_config(c));
      CHECK(violated_vertices(g, c).empty());
      CHECK(h_from_config(g, c) == h);
    }
    CHECK(seen.size() == group_order(g));
  }
}

TEST_CASE("field energy") {
  LatticeGeometry g(4);
  auto f = FieldConfig::uniform(g, 1.0);
  CHECK(field_energy(g, f, h_from_index(g, 0)) == 32.0);
  CHECK(field_energy(g, f, single_plaquette(g, 5)) == 24.0);

  LatticeGeometry g2(2);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto lam = random_field(g2, rng);
    auto h = h_from_index(g2, rng.below(8));
    auto c = sigma_x_config(g2, h);
    double e = 0.0;
    for (int b = 0; b < 8; ++b) e += lam.lambdas[b] * c.values[b];
    CHECK(field_energy(g2, lam, h) == doctest::Approx(e).epsilon(1e-14));
  }
}

TEST_CASE("sigma_x probabilities") {
  LatticeGeometry g(2);
  ExactToricOracle zero(g, {FieldConfig::uniform(g, 1.0), 0.0});
  for (double p : zero.sigma_x_probabilities()) CHECK(p == doctest::Approx(0.125).epsilon(1e-14));
  ExactToricOracle cold(g, {FieldConfig::uniform(g, 1.0), 10.0});
  CHECK(cold.sigma_x_probability(h_from_index(g, 0)) > 0.999);

  // Hand-summed 8-term ratio with a disordered field.
  auto lam = field_preset(g, "random(7)");
  ExactToricOracle o(g, {lam, 0.3});
  double z = 0.0;
  for (std::uint64_t k = 0; k < 8; ++k) z += std::exp(0.3 * field_energy(g, lam, h_from_index(g, k)));
  for (std::uint64_t k = 0; k < 8; ++k) {
    auto h = h_from_index(g, k);
    CHECK(o.sigma_x_probability(h) == doctest::Approx(std::exp(0.3 * field_energy(g, lam, h)) / z).epsilon(1e-12));
  }
}

TEST_CASE("sigma_x probabilities agree with the brute-force state vector") {
  LatticeGeometry g(2);
  Rng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    auto lam = random_field(g, rng);
    const double beta = rng.uniform(0.0, 2.0);
    ExactToricOracle o(g, {lam, beta});
    auto px = oracle::x_probabilities(oracle::x_state(2, lam.lambdas, beta));
    double total = 0.0;
    for (std::uint64_t k = 0; k < 8; ++k) {
      auto h = h_from_index(g, k);
      const double p = o.sigma_x_probability(h);
      total += p;
      CHECK(p == doctest::Approx(px[bits_from_config(sigma_x_config(g, h))]).epsilon(1e-10));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("probabilities sum to one at n=3") {
  LatticeGeometry g(3);
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    ExactToricOracle o(g, {random_field(g, rng), rng.uniform(0.0, 2.0)});
    double total = 0.0;
    for (double p : o.sigma_x_probabilities()) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("Ising mapping") {
  LatticeGeometry g(2);
  auto id = map_to_ising(g, h_from_index(g, 0));
  for (int t : id.thetas) CHECK(t == 1);
  auto one = map_to_ising(g, single_plaquette(g, 2));
  for (int p = 0; p < 4; ++p) CHECK(one.thetas[p] == (p == 2 ? -1 : 1));
  auto c = sigma_x_config(g, single_plaquette(g, 2));
  for (int b = 0; b < 8; ++b) {
    const bool on_boundary = std::count(g.plaquette_bonds(2).begin(), g.plaquette_bonds(2).end(), b) > 0;
    CHECK(c.values[b] == (on_boundary ? -1 : 1));
  }

  CHECK(ising_boltzmann_weight(g, h_from_index(g, 0), {FieldConfig::uniform(g, 1.0), 0.7}) ==
        doctest::Approx(std::exp(8 * 0.7)).epsilon(1e-14));
  for (std::uint64_t k = 0; k < 8; ++k)
    CHECK(ising_boltzmann_weight(g, h_from_index(g, k), {FieldConfig::uniform(g, 0.0), 1.3}) == 1.0);

  Rng rng(10);
  for (int n : {2, 3}) {
    LatticeGeometry gn(n);
    for (int trial = 0; trial < 10; ++trial) {
      ToricField field{random_field(gn, rng), rng.uniform(0.0, 2.0)};
      for (std::uint64_t k = 0; k < group_order(gn); ++k) {
        auto h = h_from_index(gn, k);
        const double w = ising_boltzmann_weight(gn, h, field);
        const double ref = std::exp(field.beta * field_energy(gn, field.lambdas, h));
        CHECK(std::abs(w - ref) <= 1e-12 * ref);
        auto th = map_to_ising(gn, h);
        auto x = sigma_x_config(gn, h);
        for (int b = 0; b < gn.bond_count(); ++b) {
          auto ps = gn.bond_plaquettes(b);
          CHECK(x.values[b] == th.thetas[ps[0]] * th.thetas[ps[1]]);
        }
      }
    }
  }
}

TEST_CASE("sigma_z probability table") {
  LatticeGeometry g(2);
  auto uni = FieldConfig::uniform(g, 1.0);
  ExactToricOracle zero(g, {uni, 0.0});
  std::set<std::uint64_t> loops(zero.loops().begin(), zero.loops().end());
  CHECK(loops.size() == 8);
  for (std::uint64_t m = 0; m < 256; ++m) {
    const double p = zero.sigma_z_probability(m);
    if (loops.count(m)) {
      CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
    } else {
      CHECK(p == 0.0);
    }
  }
  for (double beta : {0.3, 0.4, 1.1}) {
    ExactToricOracle o(g, {uni, beta});
    auto ref = oracle::z_probabilities(oracle::z_state(2, uni.lambdas, beta));
    double total = 0.0;
    for (std::uint64_t m = 0; m < 256; ++m) {
      total += o.sigma_z_probability(m);
      CHECK(o.sigma_z_probability(m) == doctest::Approx(ref[m]).epsilon(1e-9));
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
  auto lam = field_preset(g, "checkerboard(+1/-1)");
  ExactToricOracle o(g, {lam, 0.6});
  auto ref = oracle::z_probabilities(oracle::z_state(2, lam.lambdas, 0.6));
  for (std::uint64_t m = 0; m < 256; ++m) CHECK(o.sigma_z_probability(m) == doctest::Approx(ref[m]).epsilon(1e-9));
}

TEST_CASE("sigma_x sampler") {
  LatticeGeometry g(2);
  auto d = sample_sigma_x(2, {FieldConfig::uniform(g, 1.0), 0.0}, 100000, 12, {0, 40});
  std::vector<std::uint64_t> counts(8, 0);
  for (const auto& c : d.configs) {
    CHECK(violated_vertices(g, c).empty());
    ++counts[h_index(h_from_config(g, c))];
  }
  CHECK(chi_square_test(counts, std::vector<double>(8, 0.125)).p_value > 0.01);

  LatticeGeometry g4(4);
  auto d4 = sample_sigma_x(4, {field_preset(g4, "random(3)"), 0.8}, 300, 5);
  for (const auto& c : d4.configs) CHECK(violated_vertices(g4, c).empty());
  CHECK(d4.configs.front().basis == Basis::x);
}

TEST_CASE("sigma_x grid sizes") {
  LatticeGeometry g(8);
  auto grid = linear_grid(0.0, 1.0, 100);
  auto d = sample_sigma_x_grid(8, FieldConfig::uniform(g, 1.0), grid, 600, 1, {}, 1);
  CHECK(d.size() == 60000);  // the reference training set held 59 950
  CHECK(d.meta.kind == ModelKind::toric_x);
}

TEST_CASE("sigma_z sampler") {
  LatticeGeometry g(3);
  auto uni = FieldConfig::uniform(g, 1.0);
  auto d0 = sample_sigma_z(3, {uni, 0.0}, 500, 3);
  for (const auto& c : d0.configs) CHECK(violated_plaquettes(g, c).empty());

  LatticeGeometry g2(2);
  auto hot = sample_sigma_z(2, {FieldConfig::uniform(g2, 1.0), 20.0}, 20000, 4, {0, 16});
  long violated = 0;
  for (const auto& c : hot.configs) violated += violated_plaquettes(g2, c).size();
  CHECK(violated / (4.0 * hot.size()) == doctest::Approx(0.5).epsilon(0.03));

  auto lam = FieldConfig::uniform(g2, 1.0);
  ExactToricOracle o(g2, {lam, 0.3});
  auto d = sample_sigma_z(2, {lam, 0.3}, 100000, 21, {0, 32});
  std::vector<std::uint64_t> counts(256, 0);
  for (const auto& c : d.configs) ++counts[flips_from_z_config(c)];
  std::vector<double> probs(256);
  for (std::uint64_t m = 0; m < 256; ++m) probs[m] = o.sigma_z_probability(m);
  CHECK(chi_square_test(counts, probs).p_value > 0.01);

  CHECK_THROWS_AS(SigmaZLoopTable(LatticeGeometry(5), {FieldConfig::uniform(LatticeGeometry(5), 1.0), 0.2}),
                  std::invalid_argument);
}

TEST_CASE("stabilizer expectation") {
  LatticeGeometry g(2);
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    auto lam = random_field(g, rng);
    const double beta = trial == 0 ? 0.0 : rng.uniform(0.0, 2.0);
    ExactToricOracle o(g, {lam, beta});
    auto state = oracle::x_state(2, lam.lambdas, beta);
    for (int p = 0; p < 4; ++p) {
      const double v = o.stabilizer_expectation(p);
      CHECK(v >= -1.0 - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(v == doctest::Approx(oracle::plaquette_expectation(state, p)).epsilon(1e-10));
      if (beta == 0.0) CHECK(std::abs(v - 1.0) < 1e-12);
    }
  }

  auto e0 = stabilizer_expectation(4, {FieldConfig::uniform(LatticeGeometry(4), 1.0), 0.0}, 3, 2000, 1);
  CHECK(std::abs(e0.value - 1.0) < 1e-12);

  auto cold = stabilizer_expectation(4, {FieldConfig::uniform(LatticeGeometry(4), 1.0), 20.0}, 3, 2000, 1);
  CHECK(cold.value < 1e-6);

  auto lam = field_preset(g, "random(11)");
  ExactToricOracle o(g, {lam, 0.4});
  for (int p = 0; p < 4; ++p) {
    auto est = stabilizer_expectation(2, {lam, 0.4}, p, 20000, 100 + p);
    CHECK(std::abs(est.value - o.stabilizer_expectation(p)) < 3.0 * est.std_error);
  }
}

TEST_CASE("stabilizer dataset") {
  LatticeGeometry g(3);
  auto zero = stabilizer_dataset(3, FieldConfig::uniform(g, 0.0), std::vector<double>{0.2, 0.9}, 3, 50, 1);
  for (const auto& v : zero.vectors)
    for (double x : v) CHECK(x == 1.0);

  LatticeGeometry g8(8);
  auto grid = linear_grid(0.0, 1.0, 100);
  auto d = stabilizer_dataset(8, FieldConfig::uniform(g8, 1.0), grid, 500, 1, 2);
  CHECK(d.size() == 50000);
  CHECK(d.input_dim() == 64);

  // Large-sample limit approaches the exact vector at n=2.
  LatticeGeometry g2(2);
  auto lam = FieldConfig::uniform(g2, 1.0);
  auto big = stabilizer_dataset(2, lam, std::vector<double>{0.5}, 1, 200000, 3);
  ExactToricOracle o(g2, {lam, 0.5});
  for (int p = 0; p < 4; ++p) CHECK(big.vectors[0][p] == doctest::Approx(o.stabilizer_expectation(p)).epsilon(0.01));
}

TEST_CASE("field presets") {
  LatticeGeometry g(4);
  CHECK(field_preset(g, "uniform(+1)").lambdas == std::vector<double>(32, 1.0));
  CHECK(field_preset(g, "uniform(0.5)").lambdas == std::vector<double>(32, 0.5));
  auto half = field_preset(g, "half-zero");
  CHECK(std::count(half.lambdas.begin(), half.lambdas.end(), 0.0) == 16);
  auto r1 = field_preset(g, "random(5)"), r2 = field_preset(g, "random(5)");
  CHECK(r1.lambdas == r2.lambdas);
  for (double l : r1.lambdas) CHECK(std::abs(l) <= 1.0);
  CHECK_THROWS_AS(field_preset(g, "bogus"), std::invalid_argument);
}

}  // TEST_SUITE
