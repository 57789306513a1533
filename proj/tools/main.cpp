// topoprobe command-line interface.
#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "topoprobe/io.hpp"
#include "topoprobe/manifest.hpp"
#include "topoprobe/parallel.hpp"
#include "topoprobe/pipeline.hpp"
#include "topoprobe/svg.hpp"
#include "topoprobe/toric.hpp"
#include "topoprobe/verify.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace topoprobe;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  int threads = 0;
  std::string manifest_out;
};

void add_manifest_options(CLI::App* cmd, Options& o, bool required = true) {
  auto* c = cmd->add_option("-c,--config", o.config, "experiment manifest (JSON)");
  if (required) c->required();
  cmd->add_option("-o,--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--set", o.sets, "override a manifest field, e.g. --set train.per_beta=500");
  cmd->add_option("--manifest-out", o.manifest_out, "write the resolved manifest here");
}

ExperimentManifest load_manifest(const Options& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!o.out.empty()) overrides.emplace_back("output_dir", ojson(o.out).dump());
  std::string text;
  try {
    text = read_text(o.config);
  } catch (const FormatError& e) {
    throw ConfigError("--config", e.what());
  }
  auto m = parse_manifest(text, overrides);
  if (!o.manifest_out.empty()) write_text(o.manifest_out, manifest_to_json(m));
  return m;
}

void print_result(const std::string& command, const CommandResult& r) {
  ojson j;
  j["status"] = "ok";
  j["command"] = command;
  j["artifacts"] = ojson::array();
  for (const auto& a : r.artifacts) j["artifacts"].push_back({{"path", a.path.string()}, {"sha256", a.sha256}});
  j["summary"] = r.summary_json.empty() ? ojson::object() : ojson::parse(r.summary_json);
  std::cout << j.dump(2) << "\n";
}

int fail(int code, const std::string& kind, const std::string& message, const std::string& field = {}) {
  ojson j;
  j["status"] = "error";
  j["exit_code"] = code;
  j["error"] = kind;
  if (!field.empty()) j["field"] = field;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return code;
}

std::pair<std::string, double> parse_reference(const std::string& text) {
  const auto eq = text.find('=');
  const std::string name = eq == std::string::npos ? "reference" : text.substr(0, eq);
  const std::string value = eq == std::string::npos ? text : text.substr(eq + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return {name, v};
  } catch (const std::exception&) {
    throw UsageError("--ref expects name=value or a number, got '" + text + "'");
  }
}

int run_plot(const std::vector<std::string>& curves, const std::string& column,
             const std::vector<std::string>& refs, const std::string& title, const std::string& out) {
  if (curves.empty()) throw UsageError("plot needs at least one --curve file");
  Plot plot;
  plot.title = title;
  for (const auto& path : curves) {
    const auto table = read_csv_table(path);
    if (table.columns.size() < 2) throw FormatError(path + ": need at least two columns");
    const std::string y = column.empty() ? table.columns[1] : column;
    plot.y_label = y;
    plot.x_label = table.columns[0];
    plot.series.push_back({fs::path(path).stem().string(), table.column(table.columns[0]), table.column(y)});
  }
  for (const auto& r : refs) {
    const auto [name, x] = parse_reference(r);
    plot.references.push_back({name, x});
  }
  write_text(out, plot.render());
  print_result("plot", CommandResult{{{out, sha256_file(out)}}, "{}"});
  return 0;
}

int run_stabilizer_direct(int n, double beta, const std::string& field_name, int mc,
                          std::uint64_t seed) {
  const LatticeGeometry g(n);
  const ToricField field{field_preset(g, field_name), beta};
  ojson j;
  j["status"] = "ok";
  j["command"] = "stabilizer";
  j["n"] = n;
  j["beta"] = beta;
  j["field_preset"] = field_name;
  j["mc_samples"] = mc;
  j["plaquettes"] = ojson::array();
  std::optional<ExactToricOracle> oracle;
  if (n <= 3) oracle.emplace(g, field);
  for (int p = 0; p < g.plaquette_count(); ++p) {
    const auto est = stabilizer_expectation(n, field, p, mc, chain_seed(seed, static_cast<std::uint64_t>(p), 0));
    ojson e{{"p", p}, {"value", est.value}, {"std_error", est.std_error}};
    if (oracle) e["exact"] = oracle->stabilizer_expectation(p);
    j["plaquettes"].push_back(e);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_verify(std::uint64_t seed) {
  const auto checks = run_verification(seed);
  ojson j;
  bool ok = true;
  j["checks"] = ojson::array();
  for (const auto& c : checks) {
    ok = ok && c.passed;
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["status"] = ok ? "ok" : "failed";
  std::cout << j.dump(2) << "\n";
  return ok ? 0 : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topoprobe: predictive-model detection of topological transitions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TOPOPROBE_VERSION);
  int threads_flag = 0;
  app.add_option("-j,--threads", threads_flag, "worker threads (default: TOPOPROBE_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);

  Options o;
  auto* sample = app.add_subcommand("sample", "generate train and eval datasets");
  add_manifest_options(sample, o);
  auto* train = app.add_subcommand("train", "fit the DoS model or the network ensemble");
  add_manifest_options(train, o);
  auto* predict = app.add_subcommand("predict", "prediction curves on the eval dataset");
  add_manifest_options(predict, o);

  auto* detect = app.add_subcommand("detect", "derivative curves and the transition report");
  add_manifest_options(detect, o, false);
  std::string curve_file;
  std::string report_file = "report.json";
  int window = -1;
  std::string method = "nn";
  detect->add_option("--curve", curve_file, "prediction curve CSV (instead of --config)");
  detect->add_option("--report", report_file, "report path for --curve");
  detect->add_option("--window", window, "smoothing window (-1: default)");
  detect->add_option("--method", method, "method tag for --curve");

  auto* fidelity = app.add_subcommand("fidelity", "fidelity susceptibility curve");
  add_manifest_options(fidelity, o);

  auto* stabilizer = app.add_subcommand("stabilizer", "plaquette expectations, or stabilizer datasets with --config");
  add_manifest_options(stabilizer, o, false);
  int st_n = 2;
  double st_beta = 0.0;
  std::string st_field = "uniform(1)";
  int st_mc = 1000;
  std::uint64_t st_seed = 0;
  stabilizer->add_option("--n", st_n, "lattice size");
  stabilizer->add_option("--beta", st_beta, "field amplitude");
  stabilizer->add_option("--field", st_field, "field preset");
  stabilizer->add_option("--mc", st_mc, "chain samples per plaquette");
  stabilizer->add_option("--seed", st_seed, "seed");

  auto* scaling = app.add_subcommand("scaling", "fit beta* = a + b ln(2N^2)");
  std::vector<std::string> scaling_inputs;
  std::string scaling_out = "scaling.json";
  scaling->add_option("inputs", scaling_inputs, "report JSON files or CSV (N, beta_star)")->required();
  scaling->add_option("-o,--out", scaling_out, "fit output path");

  auto* plot = app.add_subcommand("plot", "render CSV curves as SVG");
  std::vector<std::string> plot_curves;
  std::vector<std::string> plot_refs;
  std::string plot_column;
  std::string plot_title;
  std::string plot_out = "plot.svg";
  plot->add_option("--curve", plot_curves, "curve CSV (repeatable)");
  plot->add_option("--column", plot_column, "y column (default: second column)");
  plot->add_option("--ref", plot_refs, "dashed reference line, name=beta (repeatable)");
  plot->add_option("--title", plot_title, "plot title");
  plot->add_option("-o,--out", plot_out, "SVG path");

  auto* verify = app.add_subcommand("verify", "cross-check samplers and gradients against exact oracles");
  std::uint64_t verify_seed = 2024;
  verify->add_option("--seed", verify_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfigError, "usage_error", e.what());
  }

  try {
    const int threads = resolve_threads(threads_flag);
    if (sample->parsed()) {
      const auto m = load_manifest(o);
      print_result("sample", cmd_sample(m, m.output_dir, threads));
    } else if (train->parsed()) {
      const auto m = load_manifest(o);
      print_result("train", cmd_train(m, m.output_dir, threads));
    } else if (predict->parsed()) {
      const auto m = load_manifest(o);
      print_result("predict", cmd_predict(m, m.output_dir, threads));
    } else if (detect->parsed()) {
      if (!curve_file.empty()) {
        print_result("detect", detect_curve_file(curve_file, report_file, window, method));
      } else if (!o.config.empty()) {
        const auto m = load_manifest(o);
        print_result("detect", cmd_detect(m, m.output_dir));
      } else {
        throw UsageError("detect needs --config or --curve");
      }
    } else if (fidelity->parsed()) {
      const auto m = load_manifest(o);
      print_result("fidelity", cmd_fidelity(m, m.output_dir, threads));
    } else if (stabilizer->parsed()) {
      if (o.config.empty()) return run_stabilizer_direct(st_n, st_beta, st_field, st_mc, st_seed);
      const auto m = load_manifest(o);
      if (m.kind != ModelKind::stabilizer) throw ConfigError("kind", "stabilizer needs kind 'stabilizer'");
      print_result("stabilizer", cmd_sample(m, m.output_dir, threads));
    } else if (scaling->parsed()) {
      std::vector<fs::path> inputs(scaling_inputs.begin(), scaling_inputs.end());
      print_result("scaling", scaling_from_files(inputs, scaling_out));
    } else if (plot->parsed()) {
      return run_plot(plot_curves, plot_column, plot_refs, plot_title, plot_out);
    } else if (verify->parsed()) {
      return run_verify(verify_seed);
    }
    return 0;
  } catch (const ConfigError& e) {
    return fail(kConfigError, "config_error", e.what(), e.field());
  } catch (const UsageError& e) {
    return fail(kConfigError, "usage_error", e.what());
  } catch (const TrainingDiverged& e) {
    return fail(kRuntimeError, "training_diverged", e.what());
  } catch (const FormatError& e) {
    return fail(kRuntimeError, "format_error", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntimeError, "runtime_error", e.what());
  }
}
