#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topoprobe/lattice.hpp"

namespace topoprobe {

/// Which physical model produced a dataset.
enum class ModelKind { igt, toric_x, toric_z, stabilizer };

std::string to_string(ModelKind kind);
/// Throws std::invalid_argument for unknown names.
ModelKind parse_model_kind(const std::string& name);

/// Provenance of a dataset. Fully determines how it was generated.
struct DatasetMeta {
  ModelKind kind = ModelKind::igt;
  int n = 0;
  std::vector<double> beta_grid;
  int per_beta = 0;
  std::uint64_t seed = 0;
  long therm_attempts = 0;
  long stride_attempts = 0;
  bool symmetrized = false;  // igt: random energy-preserving map per record
  std::string field_preset;  // empty for igt
  int mc_samples = 0;        // stabilizer only
  std::string role;          // "train", "eval" or empty
};

/// Configurations (or stabilizer expectation vectors) with their β labels.
///
/// Spin-valued kinds fill `configs`; the stabilizer kind fills `vectors`.
/// Records are ordered by (beta index, sample index).
struct LabeledDataset {
  DatasetMeta meta;
  std::vector<double> labels;
  std::vector<SpinConfig> configs;
  std::vector<std::vector<double>> vectors;

  std::size_t size() const noexcept { return labels.size(); }
  bool is_spin() const noexcept { return meta.kind != ModelKind::stabilizer; }
  int input_dim() const noexcept;

  /// Record i as a dense input row (spins become ±1.0).
  void input_row(std::size_t i, std::span<double> out) const;

  /// Append all records of `other` (metadata of `this` is kept).
  void append(const LabeledDataset& other);
};

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace topoprobe
