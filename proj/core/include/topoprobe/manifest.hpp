#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topoprobe/dataset.hpp"
#include "topoprobe/igt.hpp"
#include "topoprobe/nn.hpp"

namespace topoprobe {

/// Invalid configuration. `field` is the dotted path of the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class PredictorType { nn, dos };

struct SampleSpec {
  std::vector<double> beta_grid;
  int per_beta = 0;
};

/// Everything needed to rerun an experiment. Serialized as JSON.
struct ExperimentManifest {
  std::string experiment_id;
  ModelKind kind = ModelKind::igt;
  int n = 0;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::string field_preset;  // toric kinds; default uniform(1)
  SampleSpec train;
  SampleSpec eval;
  ChainSchedule sampler;
  int mc_samples = 100;  // stabilizer vectors: chain samples per estimate

  PredictorType predictor = PredictorType::nn;
  ArchitectureDescriptor architecture;
  TrainConfig train_config;
  std::vector<std::uint64_t> ensemble_seeds{1, 2, 3, 4, 5};

  int smoothing_window = -1;

  bool has_fidelity = false;
  std::vector<double> fidelity_grid;
  int fidelity_samples = 20000;
  bool fidelity_exact = false;

  std::string tool_version;
};

/// Parse and validate. `overrides` are (dotted.path, value) pairs applied to
/// the JSON before validation; values parse as JSON, else as strings.
ExperimentManifest parse_manifest(std::string_view json_text,
                                  const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Fully resolved manifest: defaults filled in, grids explicit.
std::string manifest_to_json(const ExperimentManifest& manifest);

/// Seed for the dataset of a role: distinct streams for train and eval.
std::uint64_t role_seed(std::uint64_t master_seed, const std::string& role);

}  // namespace topoprobe
