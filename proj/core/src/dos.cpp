#include "topoprobe/dos.hpp"

#include <algorithm>
#include <stdexcept>

#include "topoprobe/igt.hpp"

namespace topoprobe {

double DensityOfStates::epsilon(double beta, int energy) const {
  const auto bi = std::find(beta_grid.begin(), beta_grid.end(), beta);
  const auto ei = std::find(energy_axis.begin(), energy_axis.end(), energy);
  if (bi == beta_grid.end() || ei == energy_axis.end()) return 0.0;
  return eps[bi - beta_grid.begin()][ei - energy_axis.begin()];
}

DensityOfStates dos_build(const LabeledDataset& dataset) {
  if (dataset.size() == 0) throw std::invalid_argument("density of states needs a nonempty dataset");
  if (dataset.meta.kind != ModelKind::igt) {
    throw std::invalid_argument("density of states needs an IGT dataset");
  }
  const LatticeGeometry g(dataset.meta.n);
  std::map<double, std::map<int, std::uint64_t>> table;
  std::map<int, bool> energies;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int e = igt_energy(g, dataset.configs[i]);
    ++table[dataset.labels[i]][e];
    energies[e] = true;
  }
  DensityOfStates dos;
  for (const auto& [e, unused] : energies) dos.energy_axis.push_back(e);
  for (const auto& [beta, row] : table) {
    dos.beta_grid.push_back(beta);
    std::uint64_t total = 0;
    for (const auto& [e, count] : row) total += count;
    std::vector<double> eps_row(dos.energy_axis.size(), 0.0);
    std::vector<std::uint64_t> count_row(dos.energy_axis.size(), 0);
    for (std::size_t k = 0; k < dos.energy_axis.size(); ++k) {
      const auto it = row.find(dos.energy_axis[k]);
      if (it == row.end()) continue;
      count_row[k] = it->second;
      eps_row[k] = static_cast<double>(it->second) / static_cast<double>(total);
    }
    dos.eps.push_back(std::move(eps_row));
    dos.counts.push_back(std::move(count_row));
  }
  return dos;
}

DosModel dos_model(const DensityOfStates& dos) {
  DosModel model;
  for (std::size_t k = 0; k < dos.energy_axis.size(); ++k) {
    double weighted = 0.0;
    std::uint64_t total = 0;
    for (std::size_t b = 0; b < dos.beta_grid.size(); ++b) {
      weighted += dos.beta_grid[b] * static_cast<double>(dos.counts[b][k]);
      total += dos.counts[b][k];
    }
    if (total == 0) continue;
    model.beta_av[dos.energy_axis[k]] = weighted / static_cast<double>(total);
    model.counts[dos.energy_axis[k]] = total;
  }
  return model;
}

DosPrediction dos_predict(const DosModel& model, int energy) {
  if (model.beta_av.empty()) throw std::invalid_argument("density-of-states model is empty");
  const auto hit = model.beta_av.find(energy);
  if (hit != model.beta_av.end()) return {hit->second, false};
  const auto upper = model.beta_av.lower_bound(energy);
  if (upper == model.beta_av.begin()) return {upper->second, true};
  if (upper == model.beta_av.end()) return {std::prev(upper)->second, true};
  const auto lower = std::prev(upper);
  const double t = static_cast<double>(energy - lower->first) /
                   static_cast<double>(upper->first - lower->first);
  return {lower->second + t * (upper->second - lower->second), true};
}

DosPrediction dos_predict(const DosModel& model, const LatticeGeometry& g, const SpinConfig& c) {
  return dos_predict(model, igt_energy(g, c));
}

}  // namespace topoprobe
