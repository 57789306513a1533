#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "topoprobe/detector.hpp"
#include "topoprobe/manifest.hpp"

namespace topoprobe {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct Artifact {
  std::filesystem::path path;
  std::string sha256;
};

/// Files written by a command and a JSON summary of what was computed.
struct CommandResult {
  std::vector<Artifact> artifacts;
  std::string summary_json;  // object
};

/// Artifacts live in `out_dir` and are named after the experiment id:
///   <id>_train.csv, <id>_eval.csv    datasets (+ .json sidecars)
///   <id>_dos.csv, <id>_eps.csv       DoS model and ε(β, E) table
///   <id>_model_<k>.tprb              ensemble member k
///   <id>_curve_<tag>.csv             prediction curve, tag = k or dos
///   <id>_deriv_<tag>.csv             D(β)
///   <id>_report.json                 transition report
///   <id>_chi_f.csv, <id>_chi_f.json  fidelity susceptibility and its peak
std::filesystem::path artifact_path(const ExperimentManifest& m, const std::filesystem::path& out_dir,
                                    const std::string& suffix);

CommandResult cmd_sample(const ExperimentManifest& m, const std::filesystem::path& out_dir, int threads);
CommandResult cmd_train(const ExperimentManifest& m, const std::filesystem::path& out_dir, int threads);
CommandResult cmd_predict(const ExperimentManifest& m, const std::filesystem::path& out_dir, int threads);
CommandResult cmd_detect(const ExperimentManifest& m, const std::filesystem::path& out_dir);
CommandResult cmd_fidelity(const ExperimentManifest& m, const std::filesystem::path& out_dir, int threads);

/// sample, train, predict, detect and (when configured) fidelity.
CommandResult run_pipeline(const ExperimentManifest& m, const std::filesystem::path& out_dir, int threads);

/// Report for one prediction curve file, written as JSON to `report_path`.
CommandResult detect_curve_file(const std::filesystem::path& curve_path,
                                const std::filesystem::path& report_path, int window,
                                const std::string& method);

/// Scaling fit from (N, β*) pairs, read from report JSON files (fields n and
/// beta_star) or from CSV files with columns N, beta_star.
CommandResult scaling_from_files(const std::vector<std::filesystem::path>& inputs,
                                 const std::filesystem::path& out_path);

/// Serialized transition report.
std::string report_to_json(const TransitionReport& report);

}  // namespace topoprobe
