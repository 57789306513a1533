#include "topoprobe/pipeline.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <json.hpp>

#include "topoprobe/dos.hpp"
#include "topoprobe/fidelity.hpp"
#include "topoprobe/igt.hpp"
#include "topoprobe/io.hpp"
#include "topoprobe/nn.hpp"
#include "topoprobe/rng.hpp"
#include "topoprobe/toric.hpp"

namespace topoprobe {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

Artifact record(const fs::path& path) { return {path, sha256_file(path)}; }

LabeledDataset generate(const ExperimentManifest& m, const SampleSpec& spec, const std::string& role,
                        int threads) {
  const std::uint64_t seed = role_seed(m.master_seed, role);
  LabeledDataset ds;
  if (m.kind == ModelKind::igt) {
    ds = sample_igt_grid(m.n, spec.beta_grid, spec.per_beta, seed, m.sampler, threads);
  } else {
    const LatticeGeometry g(m.n);
    const FieldConfig lambdas = field_preset(g, m.field_preset);
    switch (m.kind) {
      case ModelKind::toric_x:
        ds = sample_sigma_x_grid(m.n, lambdas, spec.beta_grid, spec.per_beta, seed, m.sampler, threads);
        break;
      case ModelKind::toric_z:
        ds = sample_sigma_z_grid(m.n, lambdas, spec.beta_grid, spec.per_beta, seed, m.sampler, threads);
        break;
      default:
        ds = stabilizer_dataset(m.n, lambdas, spec.beta_grid, spec.per_beta, m.mc_samples, seed,
                                m.sampler, threads);
        break;
    }
    ds.meta.field_preset = m.field_preset;
  }
  ds.meta.role = role;
  return ds;
}

LabeledDataset load_role(const ExperimentManifest& m, const fs::path& out_dir, const std::string& role) {
  const auto path = artifact_path(m, out_dir, role + ".csv");
  if (!fs::exists(path)) {
    throw std::runtime_error("missing dataset " + path.string() + " (run sample first)");
  }
  auto ds = read_dataset(path);
  if (ds.meta.kind != m.kind || ds.meta.n != m.n) {
    throw std::runtime_error(path.string() + " does not match the manifest kind or n");
  }
  return ds;
}

std::vector<std::string> curve_tags(const ExperimentManifest& m) {
  if (m.predictor == PredictorType::dos) return {"dos"};
  std::vector<std::string> tags;
  for (std::size_t k = 0; k < m.ensemble_seeds.size(); ++k) tags.push_back(std::to_string(k));
  return tags;
}

ojson report_object(const TransitionReport& r) {
  ojson j;
  j["method"] = r.method;
  j["beta_star"] = r.no_peak ? ojson(nullptr) : ojson(r.beta_star);
  j["uncertainty"] = r.uncertainty;
  j["grid_step"] = r.grid_step;
  j["smoothing_window"] = r.window;
  j["no_peak"] = r.no_peak;
  j["members"] = r.members;
  return j;
}

void merge(CommandResult& into, const CommandResult& from, const std::string& key) {
  into.artifacts.insert(into.artifacts.end(), from.artifacts.begin(), from.artifacts.end());
  auto summary = ojson::parse(into.summary_json.empty() ? "{}" : into.summary_json);
  summary[key] = ojson::parse(from.summary_json);
  into.summary_json = summary.dump();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

fs::path artifact_path(const ExperimentManifest& m, const fs::path& out_dir, const std::string& suffix) {
  return out_dir / (m.experiment_id + "_" + suffix);
}

std::string report_to_json(const TransitionReport& report) { return report_object(report).dump(2) + "\n"; }

CommandResult cmd_sample(const ExperimentManifest& m, const fs::path& out_dir, int threads) {
  CommandResult result;
  ojson summary;
  for (const std::string role : {"train", "eval"}) {
    const auto& spec = role == "train" ? m.train : m.eval;
    const auto ds = generate(m, spec, role, threads);
    const auto path = artifact_path(m, out_dir, role + ".csv");
    write_dataset(path, ds);
    result.artifacts.push_back(record(path));
    result.artifacts.push_back(record(path.string() + ".json"));
    summary[role] = {{"rows", ds.size()}, {"width", 1 + ds.input_dim()}};
  }
  result.summary_json = summary.dump();
  return result;
}

CommandResult cmd_train(const ExperimentManifest& m, const fs::path& out_dir, int threads) {
  const auto ds = load_role(m, out_dir, "train");
  CommandResult result;
  ojson summary;
  if (m.predictor == PredictorType::dos) {
    const auto dos = dos_build(ds);
    std::string eps = "beta,E,eps,count\n";
    for (std::size_t b = 0; b < dos.beta_grid.size(); ++b) {
      for (std::size_t e = 0; e < dos.energy_axis.size(); ++e) {
        if (dos.counts[b][e] == 0) continue;
        eps += format_double(dos.beta_grid[b]) + "," + std::to_string(dos.energy_axis[e]) + "," +
               format_double(dos.eps[b][e]) + "," + std::to_string(dos.counts[b][e]) + "\n";
      }
    }
    const auto eps_path = artifact_path(m, out_dir, "eps.csv");
    write_text(eps_path, eps);
    const auto model = dos_model(dos);
    const auto path = artifact_path(m, out_dir, "dos.csv");
    write_dos_model(path, model);
    result.artifacts.push_back(record(eps_path));
    result.artifacts.push_back(record(path));
    summary["energies"] = model.beta_av.size();
  } else {
    const auto members = ensemble_train(ds, m.architecture, m.train_config, m.ensemble_seeds, threads);
    summary["members"] = ojson::array();
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto path = artifact_path(m, out_dir, "model_" + std::to_string(k) + ".tprb");
      write_model(path, members[k].model);
      result.artifacts.push_back(record(path));
      summary["members"].push_back({{"seed", m.ensemble_seeds[k]},
                                    {"initial_loss", members[k].initial_loss},
                                    {"final_loss", members[k].final_loss},
                                    {"loss_history", members[k].loss_history},
                                    {"validation_history", members[k].validation_history}});
    }
  }
  result.summary_json = summary.dump();
  return result;
}

CommandResult cmd_predict(const ExperimentManifest& m, const fs::path& out_dir, int threads) {
  const auto ds = load_role(m, out_dir, "eval");
  CommandResult result;
  ojson summary;
  const auto write_curve = [&](const std::string& tag, const std::vector<double>& preds) {
    const auto curve = prediction_curve(ds.labels, preds, m.eval.beta_grid);
    const auto path = artifact_path(m, out_dir, "curve_" + tag + ".csv");
    write_prediction_curve(path, curve);
    result.artifacts.push_back(record(path));
  };
  if (m.predictor == PredictorType::dos) {
    const auto model = read_dos_model(artifact_path(m, out_dir, "dos.csv"));
    const LatticeGeometry g(m.n);
    std::vector<double> preds;
    std::size_t fallbacks = 0;
    for (const auto& c : ds.configs) {
      const auto p = dos_predict(model, g, c);
      preds.push_back(p.beta);
      fallbacks += p.fallback ? 1 : 0;
    }
    write_curve("dos", preds);
    summary["fallback_records"] = fallbacks;
  } else {
    for (const auto& tag : curve_tags(m)) {
      const auto model = read_model(artifact_path(m, out_dir, "model_" + tag + ".tprb"));
      if (model.architecture().input != input_shape_for(ds)) {
        throw std::runtime_error("model " + tag + " does not accept the evaluation data");
      }
      write_curve(tag, model.predict(ds, threads));
    }
  }
  summary["records"] = ds.size();
  result.summary_json = summary.dump();
  return result;
}

CommandResult cmd_detect(const ExperimentManifest& m, const fs::path& out_dir) {
  CommandResult result;
  const std::string method = m.predictor == PredictorType::dos ? "dos" : "nn";
  std::vector<TransitionReport> reports;
  ojson members = ojson::array();
  for (const auto& tag : curve_tags(m)) {
    const auto curve = read_prediction_curve(artifact_path(m, out_dir, "curve_" + tag + ".csv"));
    const auto dcurve = derivative_curve(curve);
    const auto path = artifact_path(m, out_dir, "deriv_" + tag + ".csv");
    write_derivative_curve(path, dcurve);
    result.artifacts.push_back(record(path));
    auto report = find_crossover(dcurve, m.smoothing_window, method);
    auto entry = report_object(report);
    entry["tag"] = tag;
    entry["peak_dominance"] = report.no_peak ? 0.0 : peak_dominance(dcurve, m.smoothing_window);
    members.push_back(entry);
    reports.push_back(report);
  }
  TransitionReport aggregate;
  if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.no_peak; })) {
    aggregate = reports.front();
    aggregate.no_peak = true;
    aggregate.beta_star = std::nan("");
    aggregate.members = static_cast<int>(reports.size());
  } else {
    aggregate = ensemble_crossover(reports);
  }
  ojson j;
  j["experiment_id"] = m.experiment_id;
  j["kind"] = to_string(m.kind);
  j["n"] = m.n;
  const auto summary = report_object(aggregate);
  for (const auto& [k, v] : summary.items()) j[k] = v;
  j["member_reports"] = members;
  const auto path = artifact_path(m, out_dir, "report.json");
  write_text(path, j.dump(2) + "\n");
  result.artifacts.push_back(record(path));
  result.summary_json = j.dump();
  return result;
}

CommandResult cmd_fidelity(const ExperimentManifest& m, const fs::path& out_dir, int threads) {
  if (!m.has_fidelity) throw ConfigError("fidelity", "section missing from the manifest");
  const LatticeGeometry g(m.n);
  const FieldConfig lambdas = field_preset(g, m.field_preset);
  const ChiFCurve curve =
      m.fidelity_exact
          ? chi_f_curve_exact(g, lambdas, m.fidelity_grid)
          : chi_f_curve_mc(m.n, lambdas, m.fidelity_grid, m.fidelity_samples,
                           chain_seed(m.master_seed, 2, 0x636869), m.sampler, threads);
  CommandResult result;
  const auto csv = artifact_path(m, out_dir, "chi_f.csv");
  write_chi_f_curve(csv, curve);
  ojson j;
  j["experiment_id"] = m.experiment_id;
  j["n"] = m.n;
  j["method"] = curve.method;
  j["field_preset"] = m.field_preset;
  j["beta_peak"] = chi_f_peak(curve);
  const auto json_path = artifact_path(m, out_dir, "chi_f.json");
  write_text(json_path, j.dump(2) + "\n");
  result.artifacts.push_back(record(csv));
  result.artifacts.push_back(record(json_path));
  result.summary_json = j.dump();
  return result;
}

CommandResult run_pipeline(const ExperimentManifest& m, const fs::path& out_dir, int threads) {
  CommandResult result;
  merge(result, cmd_sample(m, out_dir, threads), "sample");
  merge(result, cmd_train(m, out_dir, threads), "train");
  merge(result, cmd_predict(m, out_dir, threads), "predict");
  merge(result, cmd_detect(m, out_dir), "detect");
  if (m.has_fidelity) merge(result, cmd_fidelity(m, out_dir, threads), "fidelity");
  return result;
}

CommandResult detect_curve_file(const fs::path& curve_path, const fs::path& report_path, int window,
                                const std::string& method) {
  const auto curve = read_prediction_curve(curve_path);
  const auto dcurve = derivative_curve(curve);
  const auto report = find_crossover(dcurve, window, method);
  auto j = report_object(report);
  j["peak_dominance"] = report.no_peak ? 0.0 : peak_dominance(dcurve, window);
  write_text(report_path, j.dump(2) + "\n");
  return {{record(report_path)}, j.dump()};
}

CommandResult scaling_from_files(const std::vector<fs::path>& inputs, const fs::path& out_path) {
  std::vector<int> sizes;
  std::vector<double> stars;
  for (const auto& in : inputs) {
    if (in.extension() == ".json") {
      const auto j = nlohmann::json::parse(read_text(in), nullptr, false);
      if (j.is_discarded() || !j.contains("n") || !j.contains("beta_star") || !j["beta_star"].is_number()) {
        throw FormatError(in.string() + ": expected a report with numeric n and beta_star");
      }
      sizes.push_back(j["n"].get<int>());
      stars.push_back(j["beta_star"].get<double>());
    } else {
      const auto table = read_csv_table(in);
      for (double n : table.column("N")) sizes.push_back(static_cast<int>(n));
      for (double b : table.column("beta_star")) stars.push_back(b);
    }
  }
  const auto fit = scaling_fit(sizes, stars);
  ojson j;
  j["sizes"] = fit.sizes;
  j["beta_stars"] = fit.beta_stars;
  j["a"] = fit.a;
  j["b"] = fit.b;
  j["r_squared"] = fit.r_squared;
  j["residuals"] = fit.residuals;
  write_text(out_path, j.dump(2) + "\n");
  return {{record(out_path)}, j.dump()};
}

}  // namespace topoprobe
