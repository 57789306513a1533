#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topoprobe/dataset.hpp"

namespace topoprobe {

enum class LayerKind { conv, dense, relu, dropout, global_avg_pool, flatten };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  int units = 0;      // conv: filters, dense: neurons
  int kernel = 0;     // conv only
  double rate = 0.0;  // dropout only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct TensorShape {
  int channels = 1;
  int height = 1;
  int width = 1;

  int size() const noexcept { return channels * height * width; }
  int positions() const noexcept { return height * width; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

/// Network layout. `layers` lists the hidden stack; a linear dense layer with
/// one output is always appended as the regression head.
///
/// Parameter layout (flat, in layer order):
///   conv:  weights [filters][in_channels][kernel][kernel], then bias [filters]
///   dense: weights [units][inputs], then bias [units]
/// Tensors are (channel, row, col) row-major. Convolutions wrap periodically:
///   out[f][r][c] = b[f] + Σ w[f][ch][i][j] in[ch][r + i - o][c + j - o],  o = (kernel - 1) / 2
/// Flatten emits index ch*H*W + r*W + c; global average pooling averages each channel.
struct ArchitectureDescriptor {
  std::string name;
  TensorShape input;
  std::vector<LayerSpec> layers;

  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

/// Throws std::invalid_argument with the offending field.
ArchitectureDescriptor parse_architecture(std::string_view json_text);
std::string architecture_to_json(const ArchitectureDescriptor& arch);

/// Presets for input lattice size n: igt_full, igt_desk, toric_x_full,
/// toric_x_desk, toric_z_full, toric_z_desk, stabilizer. The desk variants
/// use a quarter of the convolution filters.
ArchitectureDescriptor architecture_preset(const std::string& name, int n);

/// Input shape of a dataset: (2, n, n) for spin configurations, (n^2, 1, 1) otherwise.
TensorShape input_shape_for(const LabeledDataset& dataset);

/// Maps labels into [0, 1] for training.
struct LabelScaling {
  double lo = 0.0;
  double hi = 1.0;

  double scale(double beta) const noexcept { return (beta - lo) / (hi - lo); }
  double descale(double y) const noexcept { return lo + y * (hi - lo); }
  static LabelScaling fit(std::span<const double> labels);
};

/// One resolved layer: shapes and the slice of the parameter vector it owns.
struct LayerPlan {
  LayerSpec spec;
  TensorShape in;
  TensorShape out;
  std::size_t offset = 0;       // first weight
  std::size_t weight_count = 0;
  std::size_t bias_count = 0;
};

std::vector<LayerPlan> plan_layers(const ArchitectureDescriptor& arch);
std::size_t parameter_count(const ArchitectureDescriptor& arch);

/// Cache-line aligned storage. Vectorized kernels peel differently depending on
/// the start address, so a fixed alignment keeps results bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};
  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

class NeuralNet {
 public:
  /// All parameters zero. Throws std::invalid_argument for an invalid layout.
  explicit NeuralNet(ArchitectureDescriptor arch, LabelScaling scaling = {});

  const ArchitectureDescriptor& architecture() const noexcept { return arch_; }
  const std::vector<LayerPlan>& plan() const noexcept { return plan_; }
  const LabelScaling& scaling() const noexcept { return scaling_; }
  void set_scaling(LabelScaling s) noexcept { scaling_ = s; }

  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }

  /// β prediction for one input (inference mode, no dropout).
  double forward(std::span<const double> input) const;

  /// Raw network outputs (scaled units) for a row-major batch of inputs.
  std::vector<double> forward_scaled(std::span<const double> inputs, std::size_t batch) const;

  /// β predictions for every record of a dataset.
  std::vector<double> predict(const LabeledDataset& dataset, int threads = 1) const;

  /// Mean squared error in scaled units over the batch and its gradient
  /// (written into `grad`, same layout as parameters()). With `train_mode`,
  /// dropout masks come from Rng(dropout_seed).
  double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                           std::span<double> grad, bool train_mode,
                           std::uint64_t dropout_seed) const;

  /// Same loss without the gradient.
  double loss(std::span<const double> inputs, std::span<const double> targets) const;

 private:
  ArchitectureDescriptor arch_;
  std::vector<LayerPlan> plan_;
  LabelScaling scaling_;
  AlignedVector params_;
};

/// Fan-in scaled uniform weights U(-√(6/fan_in), √(6/fan_in)), zero biases.
NeuralNet nn_init(const ArchitectureDescriptor& arch, std::uint64_t seed, LabelScaling scaling = {});

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  int epochs = 20;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  bool augment_translations = false;
};

void validate(const TrainConfig& config);

struct TrainResult {
  NeuralNet model;
  std::vector<double> loss_history;        // mean minibatch loss per epoch
  std::vector<double> validation_history;  // per epoch, empty without a validation split
  double initial_loss = 0.0;               // inference-mode loss on the training split
  double final_loss = 0.0;
};

/// Raised when the training loss becomes non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adam on the MSE loss. Label scaling is fitted to the dataset labels.
/// Deterministic given (dataset, model, config).
TrainResult nn_train(const LabeledDataset& dataset, NeuralNet model, const TrainConfig& config);

/// One model per seed, each initialized with nn_init(arch, seed) and trained
/// with config.seed = seed.
std::vector<TrainResult> ensemble_train(const LabeledDataset& dataset,
                                        const ArchitectureDescriptor& arch,
                                        const TrainConfig& config,
                                        std::span<const std::uint64_t> seeds, int threads = 1);

}  // namespace topoprobe
