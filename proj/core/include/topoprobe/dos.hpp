#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "topoprobe/dataset.hpp"
#include "topoprobe/lattice.hpp"

namespace topoprobe {

/// ε(β, E): fraction of the configurations labeled β that have energy E.
struct DensityOfStates {
  std::vector<double> beta_grid;  // ascending, labels present in the data
  std::vector<int> energy_axis;   // ascending, energies present in the data
  std::vector<std::vector<double>> eps;             // [beta index][energy index]
  std::vector<std::vector<std::uint64_t>> counts;   // [beta index][energy index]

  /// ε for an arbitrary (β, E); 0 when either is absent.
  double epsilon(double beta, int energy) const;
};

/// Throws std::invalid_argument for empty or non-IGT datasets.
DensityOfStates dos_build(const LabeledDataset& dataset);

/// β^av(E): mean label of the training configurations at energy E.
struct DosModel {
  std::map<int, double> beta_av;
  std::map<int, std::uint64_t> counts;
};

DosModel dos_model(const DensityOfStates& dos);

struct DosPrediction {
  double beta = 0.0;
  bool fallback = false;  // energy unseen in training; interpolated or clamped
};

/// β^av(E); unseen energies are linearly interpolated between the nearest
/// seen energies and clamped beyond the extremes.
DosPrediction dos_predict(const DosModel& model, int energy);
DosPrediction dos_predict(const DosModel& model, const LatticeGeometry& g, const SpinConfig& c);

}  // namespace topoprobe
