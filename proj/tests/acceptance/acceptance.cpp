// Acceptance run. Prints one PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: topoprobe_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "topoprobe/detector.hpp"
#include "topoprobe/fidelity.hpp"
#include "topoprobe/igt.hpp"
#include "topoprobe/io.hpp"
#include "topoprobe/manifest.hpp"
#include "topoprobe/nn.hpp"
#include "topoprobe/pipeline.hpp"
#include "topoprobe/stats.hpp"
#include "topoprobe/toric.hpp"

namespace fs = std::filesystem;
using namespace topoprobe;
using nlohmann::json;

namespace {

const fs::path kManifests = TOPOPROBE_MANIFEST_DIR;
const fs::path kRuns = TOPOPROBE_ACCEPTANCE_DIR;
constexpr double kAlpha = 0.01;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int threads() {
  if (const char* v = std::getenv("TOPOPROBE_THREADS")) {
    const int t = std::atoi(v);
    if (t > 0) return t;
  }
  return 1;
}

// Manifest runs shared between criteria; keyed by manifest stem.
std::map<std::string, CommandResult> g_runs;

ExperimentManifest load(const std::string& stem) {
  return parse_manifest(read_text(kManifests / (stem + ".json")));
}

const CommandResult& run(const std::string& stem) {
  auto it = g_runs.find(stem);
  if (it != g_runs.end()) return it->second;
  const auto out = kRuns / "first" / stem;
  fs::remove_all(out);
  fs::create_directories(out);
  return g_runs[stem] = run_pipeline(load(stem), out, threads());
}

json report_of(const std::string& stem) {
  return json::parse(read_text(kRuns / "first" / stem / (stem + "_report.json")));
}

double chi_f_peak_of(const std::string& stem) {
  return json::parse(read_text(kRuns / "first" / stem / (stem + "_chi_f.json"))).at("beta_peak").get<double>();
}

std::vector<std::uint64_t> histogram(const std::vector<std::uint64_t>& keys, std::size_t bins) {
  std::vector<std::uint64_t> h(bins, 0);
  for (auto k : keys) ++h[k];
  return h;
}

// ---------------------------------------------------------------------------

void c1_igt_sampler(Outcome& o) {
  const LatticeGeometry g(2);
  for (double beta : {0.0, 0.5, 1.0, 2.0}) {
    // Energy distribution by brute-force enumeration of all 256 states.
    std::map<int, double> w;
    double z = 0.0;
    for (std::uint64_t bits = 0; bits < 256; ++bits) {
      const int e = oracle::igt_energy(2, bits);
      w[e] += std::exp(-beta * e);
      z += std::exp(-beta * e);
    }
    std::vector<int> levels;
    std::vector<double> probs;
    for (const auto& [e, x] : w) levels.push_back(e), probs.push_back(x / z);

    const auto d = sample_igt({beta, 2}, 50000, 100 + static_cast<std::uint64_t>(beta * 10), {0, 80});
    std::vector<std::uint64_t> keys;
    for (const auto& c : d.configs) {
      const int e = igt_energy(g, c);
      keys.push_back(std::find(levels.begin(), levels.end(), e) - levels.begin());
    }
    const auto r = chi_square_test(histogram(keys, levels.size()), probs);
    o.detail << " β=" << beta << ":p=" << r.p_value;
    o.require(r.p_value > kAlpha, "chi-square at β=" + std::to_string(beta));
  }
}

void c2_sigma_x(Outcome& o) {
  const LatticeGeometry g(2);
  for (const std::string preset : {"uniform(1)", "random(17)"}) {
    const auto lam = field_preset(g, preset);
    for (double beta : {0.0, 0.3, 0.8}) {
      // Reference: brute-force ground state of the deformed code.
      const auto px = oracle::x_probabilities(oracle::x_state(2, lam.lambdas, beta));
      std::vector<double> probs(8);
      for (std::uint64_t k = 0; k < 8; ++k)
        probs[k] = px[testutil::bits_from_config(sigma_x_config(g, h_from_index(g, k)))];
      const auto d = sample_sigma_x(2, {lam, beta}, 50000, 200 + static_cast<std::uint64_t>(beta * 10), {0, 40});
      std::vector<std::uint64_t> keys;
      for (const auto& c : d.configs) keys.push_back(h_index(h_from_config(g, c)));
      const auto r = chi_square_test(histogram(keys, 8), probs);
      o.detail << " " << preset << "@" << beta << ":p=" << r.p_value;
      o.require(r.p_value > kAlpha, preset + " at β=" + std::to_string(beta));
    }
  }
}

void c3_sigma_z(Outcome& o) {
  const LatticeGeometry g(2);
  const auto lam = FieldConfig::uniform(g, 1.0);
  for (double beta : {0.0, 0.3}) {
    ExactToricOracle table(g, {lam, beta});
    const auto ref = oracle::z_probabilities(oracle::z_state(2, lam.lambdas, beta));
    std::vector<double> probs(256);
    double total = 0.0, worst = 0.0;
    for (std::uint64_t m = 0; m < 256; ++m) {
      probs[m] = table.sigma_z_probability(m);
      total += probs[m];
      worst = std::max(worst, std::abs(probs[m] - ref[m]));
    }
    const auto d = sample_sigma_z(2, {lam, beta}, 100000, 300 + static_cast<std::uint64_t>(beta * 10), {0, 32});
    std::vector<std::uint64_t> keys;
    for (const auto& c : d.configs) keys.push_back(flips_from_z_config(c));
    const auto r = chi_square_test(histogram(keys, 256), probs);
    o.detail << " β=" << beta << ":p=" << r.p_value << ",Σp-1=" << total - 1.0 << ",vs_state=" << worst;
    o.require(std::abs(total - 1.0) <= 1e-10, "table normalization");
    o.require(worst < 1e-9, "table vs state vector");
    o.require(r.p_value > kAlpha, "chi-square at β=" + std::to_string(beta));
  }
}

void c4_ising(Outcome& o) {
  Rng rng(404);
  double worst = 0.0;
  long bond_mismatch = 0, checked = 0;
  for (int n : {2, 3}) {
    const LatticeGeometry g(n);
    for (int trial = 0; trial < 100; ++trial) {
      FieldConfig lam{std::vector<double>(g.bond_count())};
      for (auto& l : lam.lambdas) l = rng.uniform(-1.0, 1.0);
      const ToricField field{lam, rng.uniform(0.0, 2.0)};
      for (std::uint64_t k = 0; k < group_order(g); ++k) {
        const auto h = h_from_index(g, k);
        const double ref = std::exp(field.beta * field_energy(g, lam, h));
        worst = std::max(worst, std::abs(ising_boltzmann_weight(g, h, field) - ref) / ref);
        const auto th = map_to_ising(g, h);
        const auto x = sigma_x_config(g, h);
        for (int b = 0; b < g.bond_count(); ++b) {
          const auto ps = g.bond_plaquettes(b);
          bond_mismatch += x.values[b] != th.thetas[ps[0]] * th.thetas[ps[1]];
          ++checked;
        }
      }
    }
  }
  o.detail << " max_rel=" << worst << " bond_checks=" << checked << " mismatches=" << bond_mismatch;
  o.require(worst <= 1e-12, "Boltzmann weight identity");
  o.require(bond_mismatch == 0, "σx = θθ'");
}

void c5_fidelity(Outcome& o) {
  const LatticeGeometry g(2);
  const auto uni = FieldConfig::uniform(g, 1.0);
  for (double beta : {0.1, 0.3, 0.5, 0.8, 1.2}) {
    const double exact = chi_f_exact(g, uni, beta);
    const double brute = oracle::field_variance_quarter(oracle::x_state(2, uni.lambdas, beta), uni.lambdas);
    const auto est = chi_f_mc(2, {uni, beta}, 40000, 500 + static_cast<std::uint64_t>(beta * 10));
    const double z = std::abs(est.value - exact) / est.std_error;
    o.detail << " β=" << beta << ":z=" << z;
    o.require(std::abs(exact - brute) <= 1e-9 * std::max(1.0, brute), "exact vs state vector");
    o.require(z < 3.0, "MC within 3σ at β=" + std::to_string(beta));
  }
  const LatticeGeometry g8(8);
  const auto curve = chi_f_curve_mc(8, FieldConfig::uniform(g8, 1.0), linear_grid(0.0, 1.0, 30), 4000, 55,
                                    {}, threads());
  const double peak = chi_f_peak(curve);
  const double anchor = oracle::onsager_beta_c();
  o.detail << " n8_peak=" << peak << " anchor=" << anchor;
  o.require(std::abs(peak - anchor) <= 0.07, "n=8 peak near the Onsager coupling");
}

double gradient_error(NeuralNet net, std::size_t first, std::size_t last, int probes, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t batch = 4;
  const std::size_t dim = net.architecture().input.size();
  std::vector<double> x(dim * batch);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> y{0.1, 0.9, 0.4, 0.6};
  std::vector<double> grad(net.parameters().size()), scratch(grad.size());
  net.loss_and_gradient(x, y, grad, true, 11);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < probes; ++t) {
    const auto i = first + rng.below(last - first);
    const double keep = net.parameters()[i];
    net.parameters()[i] = keep + eps;
    const double up = net.loss_and_gradient(x, y, scratch, true, 11);
    net.parameters()[i] = keep - eps;
    const double down = net.loss_and_gradient(x, y, scratch, true, 11);
    net.parameters()[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }
  return worst;
}

void c6_gradients(Outcome& o) {
  const LayerSpec relu{LayerKind::relu}, pool{LayerKind::global_avg_pool}, flat{LayerKind::flatten};
  const auto conv = [](int f, int k) { return LayerSpec{LayerKind::conv, f, k, 0.0}; };
  const auto dense = [](int u) { return LayerSpec{LayerKind::dense, u, 0, 0.0}; };
  const LayerSpec drop{LayerKind::dropout, 0, 0, 0.3};

  struct Case {
    LayerKind kind;
    ArchitectureDescriptor arch;
  };
  const std::vector<Case> cases{
      {LayerKind::conv, {"conv", {2, 4, 4}, {conv(3, 3), relu, conv(2, 2), relu, pool, dense(5), relu}}},
      {LayerKind::dense, {"dense", {6, 1, 1}, {dense(7), relu, dense(5), relu}}},
      {LayerKind::relu, {"relu", {2, 3, 3}, {conv(3, 3), relu, flat, dense(4), relu}}},
      {LayerKind::global_avg_pool, {"pool", {2, 4, 4}, {conv(4, 3), pool, dense(4)}}},
      {LayerKind::flatten, {"flatten", {2, 3, 3}, {conv(2, 3), flat, dense(4)}}},
      {LayerKind::dropout, {"dropout", {6, 1, 1}, {dense(8), relu, drop, dense(4)}}},
  };
  std::uint64_t seed = 600;
  for (const auto& c : cases) {
    auto net = nn_init(c.arch, seed);
    Rng rng(seed + 1);
    for (auto& p : net.parameters()) p = rng.uniform(-0.5, 0.5);
    // Parametric layer types: probe only their own parameters.
    double worst = 0.0;
    if (c.kind == LayerKind::conv || c.kind == LayerKind::dense) {
      std::vector<const LayerPlan*> owned;
      for (const auto& l : net.plan())
        if (l.spec.kind == c.kind) owned.push_back(&l);
      for (std::size_t k = 0; k < owned.size(); ++k) {
        const int share = 100 / static_cast<int>(owned.size()) + (k < 100 % owned.size() ? 1 : 0);
        const auto* l = owned[k];
        worst = std::max(worst, gradient_error(net, l->offset, l->offset + l->weight_count + l->bias_count, share,
                                               seed + 2 + k));
      }
    } else {
      worst = gradient_error(net, 0, net.parameters().size(), 100, seed + 2);
    }
    o.detail << " " << to_string(c.kind) << "=" << worst;
    o.require(worst < 1e-4, to_string(c.kind));
    seed += 10;
  }
}

void c7_dos_scaling(Outcome& o) {
  std::vector<int> sizes;
  std::vector<double> stars;
  for (int n : {4, 6, 8, 10, 12}) {
    const std::string stem = "igt_dos_n" + std::to_string(n);
    run(stem);
    const auto rep = report_of(stem);
    const double star = rep.at("beta_star").get<double>();
    const double dominance = rep.at("member_reports").at(0).at("peak_dominance").get<double>();
    o.detail << " N" << n << ":β*=" << star << ",dom=" << dominance;
    o.require(!rep.at("no_peak").get<bool>() && dominance < 0.5, "single dominant peak at N=" + std::to_string(n));
    sizes.push_back(n);
    stars.push_back(star);
  }
  const auto fit = scaling_fit(sizes, stars);
  o.detail << " a=" << fit.a << " b=" << fit.b << " R2=" << fit.r_squared;
  o.require(fit.b > 0.0, "b > 0");
  o.require(fit.r_squared > 0.9, "R² > 0.9");
}

void c8_nn_vs_dos(Outcome& o) {
  run("igt_dos_n8");
  run("igt_nn_n8");
  const auto nn = report_of("igt_nn_n8");
  const double dos = report_of("igt_dos_n8").at("beta_star").get<double>();
  const double mean = nn.at("beta_star").get<double>();
  const double std = nn.at("uncertainty").get<double>();
  const double step = nn.at("grid_step").get<double>();
  const double tol = std::max(2.0 * std, 2.0 * step);
  o.detail << " nn_mean=" << mean << " nn_std=" << std << " members=[";
  for (const auto& m : nn.at("member_reports")) o.detail << m.at("beta_star").get<double>() << ";";
  o.detail << "] dos=" << dos << " |Δ|=" << std::abs(mean - dos) << " tol=" << tol << " spread_ok=" << (std < 0.5);
  o.require(nn.at("members").get<int>() == 5, "k = 5");
  o.require(std::abs(mean - dos) <= tol, "NN mean within tolerance of DoS β*");
}

void c9_toric_x(Outcome& o) {
  run("toric_x_n8");
  const auto nn = report_of("toric_x_n8");
  const double star = nn.at("beta_star").get<double>();
  const double peak = chi_f_peak_of("toric_x_n8");
  o.detail << " nn=" << star << "±" << nn.at("uncertainty").get<double>() << " chi_f_peak=" << peak
           << " |Δ|=" << std::abs(star - peak);
  o.require(std::abs(star - peak) <= 0.07, "D-peak vs χF peak");
}

void c10_stabilizer(Outcome& o) {
  // β = 0: every plaquette expectation is exactly 1.
  for (int n : {4, 8}) {
    const LatticeGeometry g(n);
    const auto est = stabilizer_expectation(n, {FieldConfig::uniform(g, 1.0), 0.0}, 0, 2000, 1000 + n);
    o.detail << " mc0_n" << n << "=" << est.value;
    o.require(std::abs(est.value - 1.0) <= 1e-3, "MC at β=0");
  }
  const LatticeGeometry g2(2);
  double worst0 = 0.0;
  for (const std::string preset : {"uniform(1)", "random(5)"}) {
    ExactToricOracle ex(g2, {field_preset(g2, preset), 0.0});
    for (int p = 0; p < 4; ++p) worst0 = std::max(worst0, std::abs(ex.stabilizer_expectation(p) - 1.0));
  }
  o.detail << " oracle0=" << worst0;
  o.require(worst0 <= 1e-12, "oracle at β=0");

  double worst_z = 0.0;
  for (const std::string preset : {"uniform(1)", "random(9)"}) {
    const auto lam = field_preset(g2, preset);
    for (double beta : {0.3, 0.7}) {
      ExactToricOracle ex(g2, {lam, beta});
      for (int p = 0; p < 4; ++p) {
        // Exact 8-term sum over H, written out independently.
        double num = 0.0, z = 0.0;
        for (std::uint64_t k = 0; k < 8; ++k) {
          const auto h = h_from_index(g2, k);
          auto bh = h;
          bh.plaquette_mask[p] ^= 1;
          const double e = field_energy(g2, lam, h);
          num += std::exp(beta * e) * std::exp(0.5 * beta * (field_energy(g2, lam, bh) - e));
          z += std::exp(beta * e);
        }
        const double exact = num / z;
        const auto est = stabilizer_expectation(2, {lam, beta}, p, 20000, 1100 + p + static_cast<int>(beta * 10));
        const double zscore = std::abs(est.value - exact) / std::max(est.std_error, 1e-300);
        worst_z = std::max(worst_z, zscore);
        o.require(std::abs(ex.stabilizer_expectation(p) - exact) <= 1e-12, "oracle vs 8-term sum");
        o.require(zscore < 3.0, "n=2 MC within 3σ");
      }
    }
  }
  o.detail << " worst_z=" << worst_z;

  run("stabilizer_n8");
  const auto rep = report_of("stabilizer_n8");
  const double star = rep.at("beta_star").get<double>();
  const double peak = chi_f_peak_of("stabilizer_n8");
  o.detail << " dense_net=" << star << " chi_f_peak=" << peak << " |Δ|=" << std::abs(star - peak);
  o.require(std::abs(star - peak) <= 0.07, "dense-net D-peak vs χF peak");
}

void c11_determinism(Outcome& o) {
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(kManifests))
    if (entry.path().extension() == ".json") stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  std::size_t files = 0;
  for (const auto& stem : stems) {
    const auto& first = run(stem);
    const auto out = kRuns / "rerun" / stem;
    fs::remove_all(out);
    fs::create_directories(out);
    const auto second = run_pipeline(load(stem), out, threads());
    std::map<std::string, std::string> a, b;
    for (const auto& art : first.artifacts) a[art.path.filename().string()] = art.sha256;
    for (const auto& art : second.artifacts) b[art.path.filename().string()] = art.sha256;
    // Also hash from disk, so an artifact rewritten after reporting is caught.
    for (const auto& [name, hash] : a) o.require(sha256_file(kRuns / "first" / stem / name) == hash, stem + "/" + name);
    o.require(a == b, stem);
    files += a.size();
  }
  o.detail << " manifests=" << stems.size() << " artifacts=" << files;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0: no runtime bound
  std::function<void(Outcome&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "IGT sampler exactness (n=2)", 60, c1_igt_sampler},
      {2, "sigma-x projection exactness (n=2)", 60, c2_sigma_x},
      {3, "sigma-z projection exactness (n=2)", 120, c3_sigma_z},
      {4, "Ising-mapping identity (n=2,3)", 0, c4_ising},
      {5, "fidelity susceptibility", 600, c5_fidelity},
      {6, "gradient correctness", 0, c6_gradients},
      {7, "DoS pipeline and logarithmic scaling", 1800, c7_dos_scaling},
      {8, "NN ensemble vs DoS (N=8)", 2700, c8_nn_vs_dos},
      {9, "toric sigma-x NN vs chi_F peak (N=8)", 2700, c9_toric_x},
      {10, "stabilizer channel", 1200, c10_stabilizer},
      {11, "determinism of acceptance manifests", 0, c11_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime budget");
    ok = ok && o.pass;
    std::printf("%s criterion %d: %s (%.1fs)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
