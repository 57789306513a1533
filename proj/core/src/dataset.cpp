#include "topoprobe/dataset.hpp"

#include <stdexcept>

namespace topoprobe {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::igt: return "igt";
    case ModelKind::toric_x: return "toric_x";
    case ModelKind::toric_z: return "toric_z";
    case ModelKind::stabilizer: return "stabilizer";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "igt") return ModelKind::igt;
  if (name == "toric_x") return ModelKind::toric_x;
  if (name == "toric_z") return ModelKind::toric_z;
  if (name == "stabilizer") return ModelKind::stabilizer;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

int LabeledDataset::input_dim() const noexcept {
  return is_spin() ? 2 * meta.n * meta.n : meta.n * meta.n;
}

void LabeledDataset::input_row(std::size_t i, std::span<double> out) const {
  if (static_cast<int>(out.size()) != input_dim()) {
    throw std::invalid_argument("input row buffer has the wrong width");
  }
  if (is_spin()) {
    const auto& v = configs.at(i).values;
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<double>(v[k]);
  } else {
    const auto& v = vectors.at(i);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k];
  }
}

void LabeledDataset::append(const LabeledDataset& other) {
  if (other.meta.kind != meta.kind || other.meta.n != meta.n) {
    throw std::invalid_argument("cannot append datasets of different kind or size");
  }
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  configs.insert(configs.end(), other.configs.begin(), other.configs.end());
  vectors.insert(vectors.end(), other.vectors.begin(), other.vectors.end());
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

}  // namespace topoprobe
