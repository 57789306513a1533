#include "topoprobe/nn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "topoprobe/parallel.hpp"
#include "topoprobe/rng.hpp"

namespace topoprobe {
namespace {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMat>;
using Weights = Eigen::Map<RowMat>;
using ConstBias = Eigen::Map<const Eigen::VectorXd>;
using Bias = Eigen::Map<Eigen::VectorXd>;

int wrap(int k, int n) { return ((k % n) + n) % n; }

// Source position table for a periodic convolution: entry (i*k + j)*HW + pos
// is the input position read by kernel tap (i, j) at output position pos.
std::vector<int> conv_sources(const TensorShape& in, int kernel) {
  const int o = (kernel - 1) / 2;
  const int hw = in.positions();
  std::vector<int> src(static_cast<std::size_t>(kernel * kernel * hw));
  for (int i = 0; i < kernel; ++i) {
    for (int j = 0; j < kernel; ++j) {
      for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
          src[(i * kernel + j) * hw + r * in.width + c] =
              wrap(r + i - o, in.height) * in.width + wrap(c + j - o, in.width);
        }
      }
    }
  }
  return src;
}

// Activations are (channels, batch * positions), column b*HW + pos.
struct LayerCache {
  Mat input;
  Mat cols;  // conv im2col
  Mat mask;  // dropout
  std::vector<int> sources;
};

Mat to_activation(std::span<const double> inputs, std::size_t batch, const TensorShape& shape) {
  const int hw = shape.positions();
  const auto d = static_cast<std::size_t>(shape.size());
  if (inputs.size() != batch * d) throw std::invalid_argument("input batch has the wrong size");
  Mat a(shape.channels, static_cast<Eigen::Index>(batch) * hw);
  for (std::size_t b = 0; b < batch; ++b) {
    for (int ch = 0; ch < shape.channels; ++ch) {
      for (int pos = 0; pos < hw; ++pos) {
        a(ch, static_cast<Eigen::Index>(b) * hw + pos) = inputs[b * d + ch * hw + pos];
      }
    }
  }
  return a;
}

Mat conv_im2col(const Mat& a, const LayerPlan& layer, const std::vector<int>& src,
                std::size_t batch) {
  const int k = layer.spec.kernel;
  const int kk = k * k;
  const int hw = layer.in.positions();
  const int cin = layer.in.channels;
  Mat cols(cin * kk, static_cast<Eigen::Index>(batch) * hw);
  for (std::size_t b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * hw;
    for (int pos = 0; pos < hw; ++pos) {
      double* out = cols.col(base + pos).data();
      for (int ch = 0; ch < cin; ++ch) {
        for (int t = 0; t < kk; ++t) out[ch * kk + t] = a(ch, base + src[t * hw + pos]);
      }
    }
  }
  return cols;
}

Mat forward_layer(const LayerPlan& layer, std::span<const double> params, const Mat& a,
                  std::size_t batch, bool train_mode, Rng* rng, LayerCache* cache) {
  const int hw = layer.in.positions();
  switch (layer.spec.kind) {
    case LayerKind::conv: {
      const int rows = layer.out.channels;
      const int cols_per = layer.in.channels * layer.spec.kernel * layer.spec.kernel;
      ConstWeights w(params.data() + layer.offset, rows, cols_per);
      ConstBias bias(params.data() + layer.offset + layer.weight_count, rows);
      std::vector<int> src = conv_sources(layer.in, layer.spec.kernel);
      Mat cols = conv_im2col(a, layer, src, batch);
      Mat out = w * cols;
      out.colwise() += bias;
      if (cache) {
        cache->cols = std::move(cols);
        cache->sources = std::move(src);
      }
      return out;
    }
    case LayerKind::dense: {
      ConstWeights w(params.data() + layer.offset, layer.out.channels, layer.in.channels);
      ConstBias bias(params.data() + layer.offset + layer.weight_count, layer.out.channels);
      Mat out = w * a;
      out.colwise() += bias;
      if (cache) cache->input = a;
      return out;
    }
    case LayerKind::relu: {
      if (cache) cache->input = a;
      return a.cwiseMax(0.0);
    }
    case LayerKind::dropout: {
      if (!train_mode || layer.spec.rate <= 0.0) {
        if (cache) cache->mask.resize(0, 0);
        return a;
      }
      const double keep = 1.0 - layer.spec.rate;
      Mat mask(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
      }
      Mat out = a.cwiseProduct(mask);
      if (cache) cache->mask = std::move(mask);
      return out;
    }
    case LayerKind::global_avg_pool: {
      Mat out(layer.in.channels, static_cast<Eigen::Index>(batch));
      for (std::size_t b = 0; b < batch; ++b) {
        out.col(static_cast<Eigen::Index>(b)) =
            a.middleCols(static_cast<Eigen::Index>(b) * hw, hw).rowwise().sum() / hw;
      }
      return out;
    }
    case LayerKind::flatten: {
      Mat out(layer.out.channels, static_cast<Eigen::Index>(batch));
      for (std::size_t b = 0; b < batch; ++b) {
        for (int ch = 0; ch < layer.in.channels; ++ch) {
          for (int pos = 0; pos < hw; ++pos) {
            out(ch * hw + pos, static_cast<Eigen::Index>(b)) =
                a(ch, static_cast<Eigen::Index>(b) * hw + pos);
          }
        }
      }
      return out;
    }
  }
  throw std::logic_error("unhandled layer kind");
}

Mat backward_layer(const LayerPlan& layer, std::span<const double> params, const Mat& d_out,
                   std::size_t batch, const LayerCache& cache, std::span<double> grad) {
  const int hw = layer.in.positions();
  switch (layer.spec.kind) {
    case LayerKind::conv: {
      const int rows = layer.out.channels;
      const int kk = layer.spec.kernel * layer.spec.kernel;
      const int cols_per = layer.in.channels * kk;
      ConstWeights w(params.data() + layer.offset, rows, cols_per);
      Weights dw(grad.data() + layer.offset, rows, cols_per);
      Bias db(grad.data() + layer.offset + layer.weight_count, rows);
      dw.noalias() += d_out * cache.cols.transpose();
      const Eigen::VectorXd bias_grad = d_out.rowwise().sum();
      db += bias_grad;
      const Mat d_cols = w.transpose() * d_out;
      Mat d_in = Mat::Zero(layer.in.channels, static_cast<Eigen::Index>(batch) * hw);
      for (std::size_t b = 0; b < batch; ++b) {
        const Eigen::Index base = static_cast<Eigen::Index>(b) * hw;
        for (int pos = 0; pos < hw; ++pos) {
          const double* col = d_cols.col(base + pos).data();
          for (int ch = 0; ch < layer.in.channels; ++ch) {
            for (int t = 0; t < kk; ++t) {
              d_in(ch, base + cache.sources[t * hw + pos]) += col[ch * kk + t];
            }
          }
        }
      }
      return d_in;
    }
    case LayerKind::dense: {
      ConstWeights w(params.data() + layer.offset, layer.out.channels, layer.in.channels);
      Weights dw(grad.data() + layer.offset, layer.out.channels, layer.in.channels);
      Bias db(grad.data() + layer.offset + layer.weight_count, layer.out.channels);
      dw.noalias() += d_out * cache.input.transpose();
      const Eigen::VectorXd bias_grad = d_out.rowwise().sum();
      db += bias_grad;
      return w.transpose() * d_out;
    }
    case LayerKind::relu:
      return d_out.cwiseProduct((cache.input.array() > 0.0).cast<double>().matrix());
    case LayerKind::dropout:
      if (cache.mask.size() == 0) return d_out;
      return d_out.cwiseProduct(cache.mask);
    case LayerKind::global_avg_pool: {
      Mat d_in(layer.in.channels, static_cast<Eigen::Index>(batch) * hw);
      for (std::size_t b = 0; b < batch; ++b) {
        d_in.middleCols(static_cast<Eigen::Index>(b) * hw, hw) =
            (d_out.col(static_cast<Eigen::Index>(b)) / hw).replicate(1, hw);
      }
      return d_in;
    }
    case LayerKind::flatten: {
      Mat d_in(layer.in.channels, static_cast<Eigen::Index>(batch) * hw);
      for (std::size_t b = 0; b < batch; ++b) {
        for (int ch = 0; ch < layer.in.channels; ++ch) {
          for (int pos = 0; pos < hw; ++pos) {
            d_in(ch, static_cast<Eigen::Index>(b) * hw + pos) =
                d_out(ch * hw + pos, static_cast<Eigen::Index>(b));
          }
        }
      }
      return d_in;
    }
  }
  throw std::logic_error("unhandled layer kind");
}

LayerKind parse_layer_kind(const std::string& name) {
  if (name == "conv") return LayerKind::conv;
  if (name == "dense") return LayerKind::dense;
  if (name == "relu") return LayerKind::relu;
  if (name == "dropout") return LayerKind::dropout;
  if (name == "global_avg_pool") return LayerKind::global_avg_pool;
  if (name == "flatten") return LayerKind::flatten;
  throw std::invalid_argument("unknown layer type '" + name + "'");
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

ArchitectureDescriptor parse_architecture(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("architecture: ") + e.what());
  }
  ArchitectureDescriptor arch;
  try {
    arch.name = j.value("name", std::string{});
    const auto& in = j.at("input");
    arch.input.channels = in.value("channels", 1);
    arch.input.height = in.value("height", 1);
    arch.input.width = in.value("width", 1);
    for (const auto& l : j.at("layers")) {
      LayerSpec spec;
      spec.kind = parse_layer_kind(l.at("type").get<std::string>());
      if (spec.kind == LayerKind::conv) {
        spec.units = l.at("filters").get<int>();
        spec.kernel = l.at("kernel").get<int>();
      } else if (spec.kind == LayerKind::dense) {
        spec.units = l.at("units").get<int>();
      } else if (spec.kind == LayerKind::dropout) {
        spec.rate = l.at("rate").get<double>();
      }
      arch.layers.push_back(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("architecture: ") + e.what());
  }
  plan_layers(arch);
  return arch;
}

std::string architecture_to_json(const ArchitectureDescriptor& arch) {
  nlohmann::ordered_json j;
  j["name"] = arch.name;
  j["input"] = {{"channels", arch.input.channels},
                {"height", arch.input.height},
                {"width", arch.input.width}};
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : arch.layers) {
    nlohmann::ordered_json e;
    e["type"] = to_string(l.kind);
    if (l.kind == LayerKind::conv) {
      e["filters"] = l.units;
      e["kernel"] = l.kernel;
    } else if (l.kind == LayerKind::dense) {
      e["units"] = l.units;
    } else if (l.kind == LayerKind::dropout) {
      e["rate"] = l.rate;
    }
    j["layers"].push_back(e);
  }
  return j.dump();
}

ArchitectureDescriptor architecture_preset(const std::string& name, int n) {
  const auto conv = [](int filters, int kernel) {
    return LayerSpec{LayerKind::conv, filters, kernel, 0.0};
  };
  const auto dense = [](int units) { return LayerSpec{LayerKind::dense, units, 0, 0.0}; };
  const LayerSpec relu{LayerKind::relu};
  const LayerSpec pool{LayerKind::global_avg_pool};

  ArchitectureDescriptor arch;
  arch.name = name;
  arch.input = TensorShape{2, n, n};
  const bool desk = name.ends_with("_desk");
  const int scale = desk ? 4 : 1;
  if (name == "igt_full" || name == "igt_desk") {
    const int f = 128 / scale;
    arch.layers = {conv(f, 3), relu, conv(f, 3), relu, pool, dense(300), relu, dense(100), relu};
  } else if (name == "toric_x_full" || name == "toric_x_desk") {
    const int f = 100 / scale;
    arch.layers = {conv(f, 3), relu, conv(f, 2), relu, pool,
                   dense(100), relu, LayerSpec{LayerKind::dropout, 0, 0, 0.15}};
  } else if (name == "toric_z_full" || name == "toric_z_desk") {
    const int f = 128 / scale;
    arch.layers = {conv(f, 2), relu, conv(f, 2), relu, pool, dense(100), relu,
                   dense(100), relu, dense(50), relu};
  } else if (name == "stabilizer") {
    arch.input = TensorShape{n * n, 1, 1};
    arch.layers = {dense(20), relu, dense(20), relu};
  } else {
    throw std::invalid_argument("unknown architecture preset '" + name + "'");
  }
  return arch;
}

TensorShape input_shape_for(const LabeledDataset& dataset) {
  const int n = dataset.meta.n;
  return dataset.is_spin() ? TensorShape{2, n, n} : TensorShape{n * n, 1, 1};
}

LabelScaling LabelScaling::fit(std::span<const double> labels) {
  if (labels.empty()) return {};
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  if (*hi - *lo <= 0.0) return {*lo, *lo + 1.0};
  return {*lo, *hi};
}

std::vector<LayerPlan> plan_layers(const ArchitectureDescriptor& arch) {
  if (arch.input.channels < 1 || arch.input.height < 1 || arch.input.width < 1) {
    throw std::invalid_argument("architecture: input dimensions must be positive");
  }
  std::vector<LayerSpec> layers = arch.layers;
  layers.push_back(LayerSpec{LayerKind::dense, 1, 0, 0.0});

  std::vector<LayerPlan> plan;
  TensorShape shape = arch.input;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "architecture: layer " + std::to_string(i) + " (" +
                              to_string(layers[i].kind) + ")";
    LayerPlan p;
    p.spec = layers[i];
    p.in = shape;
    p.offset = offset;
    switch (p.spec.kind) {
      case LayerKind::conv:
        if (p.spec.units < 1 || p.spec.kernel < 1) {
          throw std::invalid_argument(where + ": filters and kernel must be positive");
        }
        if (shape.positions() == 1) throw std::invalid_argument(where + ": needs a spatial input");
        if (p.spec.kernel > shape.height || p.spec.kernel > shape.width) {
          throw std::invalid_argument(where + ": kernel larger than the lattice");
        }
        p.out = TensorShape{p.spec.units, shape.height, shape.width};
        p.weight_count = static_cast<std::size_t>(p.spec.units) * shape.channels * p.spec.kernel *
                         p.spec.kernel;
        p.bias_count = static_cast<std::size_t>(p.spec.units);
        break;
      case LayerKind::dense:
        if (p.spec.units < 1) throw std::invalid_argument(where + ": units must be positive");
        if (shape.positions() != 1) {
          throw std::invalid_argument(where + ": needs flatten or global_avg_pool first");
        }
        p.out = TensorShape{p.spec.units, 1, 1};
        p.weight_count = static_cast<std::size_t>(p.spec.units) * shape.channels;
        p.bias_count = static_cast<std::size_t>(p.spec.units);
        break;
      case LayerKind::dropout:
        if (!(p.spec.rate >= 0.0 && p.spec.rate < 1.0)) {
          throw std::invalid_argument(where + ": rate must lie in [0, 1)");
        }
        p.out = shape;
        break;
      case LayerKind::relu:
        p.out = shape;
        break;
      case LayerKind::global_avg_pool:
        p.out = TensorShape{shape.channels, 1, 1};
        break;
      case LayerKind::flatten:
        p.out = TensorShape{shape.size(), 1, 1};
        break;
    }
    offset += p.weight_count + p.bias_count;
    shape = p.out;
    plan.push_back(p);
  }
  return plan;
}

std::size_t parameter_count(const ArchitectureDescriptor& arch) {
  const auto plan = plan_layers(arch);
  return plan.back().offset + plan.back().weight_count + plan.back().bias_count;
}

NeuralNet::NeuralNet(ArchitectureDescriptor arch, LabelScaling scaling)
    : arch_(std::move(arch)), plan_(plan_layers(arch_)), scaling_(scaling) {
  params_.assign(plan_.back().offset + plan_.back().weight_count + plan_.back().bias_count, 0.0);
}

std::vector<double> NeuralNet::forward_scaled(std::span<const double> inputs,
                                              std::size_t batch) const {
  Mat a = to_activation(inputs, batch, arch_.input);
  for (const auto& layer : plan_) a = forward_layer(layer, params_, a, batch, false, nullptr, nullptr);
  return std::vector<double>(a.data(), a.data() + a.size());
}

double NeuralNet::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != arch_.input.size()) {
    throw std::invalid_argument("input has " + std::to_string(input.size()) +
                                " values, network expects " + std::to_string(arch_.input.size()));
  }
  return scaling_.descale(forward_scaled(input, 1).front());
}

std::vector<double> NeuralNet::predict(const LabeledDataset& dataset, int threads) const {
  const auto d = static_cast<std::size_t>(arch_.input.size());
  if (static_cast<std::size_t>(dataset.input_dim()) != d) {
    throw std::invalid_argument("dataset input width does not match the network");
  }
  constexpr std::size_t chunk = 256;
  const std::size_t chunks = (dataset.size() + chunk - 1) / chunk;
  std::vector<double> out(dataset.size());
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk;
    const std::size_t count = std::min(chunk, dataset.size() - lo);
    std::vector<double> rows(count * d);
    for (std::size_t i = 0; i < count; ++i) {
      dataset.input_row(lo + i, std::span<double>(rows).subspan(i * d, d));
    }
    const auto y = forward_scaled(rows, count);
    for (std::size_t i = 0; i < count; ++i) out[lo + i] = scaling_.descale(y[i]);
  });
  return out;
}

double NeuralNet::loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                                    std::span<double> grad, bool train_mode,
                                    std::uint64_t dropout_seed) const {
  const std::size_t batch = targets.size();
  if (batch == 0) throw std::invalid_argument("empty batch");
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
  // Accumulate in aligned scratch so the result does not depend on where the
  // caller's buffer lives.
  AlignedVector acc(params_.size(), 0.0);
  Rng rng(dropout_seed);
  std::vector<LayerCache> caches(plan_.size());
  Mat a = to_activation(inputs, batch, arch_.input);
  for (std::size_t l = 0; l < plan_.size(); ++l) {
    a = forward_layer(plan_[l], params_, a, batch, train_mode, &rng, &caches[l]);
  }
  double loss = 0.0;
  Mat d(1, static_cast<Eigen::Index>(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    const double diff = a(0, static_cast<Eigen::Index>(b)) - targets[b];
    loss += diff * diff;
    d(0, static_cast<Eigen::Index>(b)) = 2.0 * diff / static_cast<double>(batch);
  }
  for (std::size_t l = plan_.size(); l-- > 0;) {
    d = backward_layer(plan_[l], params_, d, batch, caches[l], acc);
  }
  std::copy(acc.begin(), acc.end(), grad.begin());
  return loss / static_cast<double>(batch);
}

double NeuralNet::loss(std::span<const double> inputs, std::span<const double> targets) const {
  const auto y = forward_scaled(inputs, targets.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < y.size(); ++b) acc += (y[b] - targets[b]) * (y[b] - targets[b]);
  return acc / static_cast<double>(y.size());
}

NeuralNet nn_init(const ArchitectureDescriptor& arch, std::uint64_t seed, LabelScaling scaling) {
  NeuralNet net(arch, scaling);
  Rng rng(chain_seed(seed, 0x1417, 0));
  auto params = net.parameters();
  for (const auto& layer : net.plan()) {
    if (layer.weight_count == 0) continue;
    const double fan_in = static_cast<double>(layer.weight_count) / layer.bias_count;
    const double limit = std::sqrt(6.0 / fan_in);
    for (std::size_t i = 0; i < layer.weight_count; ++i) {
      params[layer.offset + i] = rng.uniform(-limit, limit);
    }
  }
  return net;
}

void validate(const TrainConfig& config) {
  if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw std::invalid_argument("train: validation_fraction must lie in [0, 1)");
  }
}

namespace {

// Periodic translation of a (C, H, W) input by (dr, dc).
void translate(std::span<const double> in, std::span<double> out, const TensorShape& s, int dr,
               int dc) {
  for (int ch = 0; ch < s.channels; ++ch) {
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        out[(ch * s.height + wrap(r + dr, s.height)) * s.width + wrap(c + dc, s.width)] =
            in[(ch * s.height + r) * s.width + c];
      }
    }
  }
}

double subset_loss(const NeuralNet& net, const std::vector<double>& rows,
                   const std::vector<double>& targets, const std::vector<std::size_t>& subset,
                   std::size_t d) {
  if (subset.empty()) return 0.0;
  constexpr std::size_t chunk = 256;
  double total = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t lo = 0; lo < subset.size(); lo += chunk) {
    const std::size_t count = std::min(chunk, subset.size() - lo);
    x.resize(count * d);
    y.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = subset[lo + i];
      std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(r * d), d,
                  x.begin() + static_cast<std::ptrdiff_t>(i * d));
      y[i] = targets[r];
    }
    total += net.loss(x, y) * static_cast<double>(count);
  }
  return total / static_cast<double>(subset.size());
}

}  // namespace

TrainResult nn_train(const LabeledDataset& dataset, NeuralNet model, const TrainConfig& config) {
  validate(config);
  const std::size_t n = dataset.size();
  if (n == 0) throw std::invalid_argument("train: dataset is empty");
  for (double l : dataset.labels) {
    if (!std::isfinite(l)) throw std::invalid_argument("train: labels must be finite");
  }
  const TensorShape shape = model.architecture().input;
  const auto d = static_cast<std::size_t>(shape.size());
  if (static_cast<std::size_t>(dataset.input_dim()) != d) {
    throw std::invalid_argument("train: dataset input width does not match the network");
  }

  std::vector<double> rows(n * d);
  for (std::size_t i = 0; i < n; ++i) dataset.input_row(i, std::span<double>(rows).subspan(i * d, d));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(chain_seed(config.seed, 0xA1, 0));
  shuffle(std::span<std::size_t>(order), split_rng);
  auto n_val = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(n));
  if (n_val >= n) n_val = 0;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  model.set_scaling(LabelScaling::fit(dataset.labels));
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = model.scaling().scale(dataset.labels[i]);

  TrainResult result{model, {}, {}, 0.0, 0.0};
  NeuralNet& net = result.model;
  result.initial_loss = subset_loss(net, rows, targets, train, d);

  auto params = net.parameters();
  std::vector<double> grad(params.size());
  std::vector<double> m(params.size(), 0.0);
  std::vector<double> v(params.size(), 0.0);
  long step = 0;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<double> x;
  std::vector<double> y;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(chain_seed(config.seed, 0xB2, static_cast<std::uint64_t>(epoch)));
    shuffle(std::span<std::size_t>(train), epoch_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < train.size(); lo += batch_size, ++batch_index) {
      const std::size_t count = std::min(batch_size, train.size() - lo);
      x.resize(count * d);
      y.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t r = train[lo + i];
        const std::span<const double> src(rows.data() + r * d, d);
        const std::span<double> dst(x.data() + i * d, d);
        if (config.augment_translations && shape.positions() > 1) {
          const int dr = static_cast<int>(epoch_rng.below(static_cast<std::uint64_t>(shape.height)));
          const int dc = static_cast<int>(epoch_rng.below(static_cast<std::uint64_t>(shape.width)));
          translate(src, dst, shape, dr, dc);
        } else {
          std::copy(src.begin(), src.end(), dst.begin());
        }
        y[i] = targets[r];
      }
      const std::uint64_t dropout_seed =
          chain_seed(config.seed, 0xC3, (static_cast<std::uint64_t>(epoch) << 32) | batch_index);
      const double loss = net.loss_and_gradient(x, y, grad, true, dropout_seed);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      epoch_loss += loss * static_cast<double>(count);

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * grad[k];
        v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
        params[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.epsilon);
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(train.size()));
    if (!val.empty()) result.validation_history.push_back(subset_loss(net, rows, targets, val, d));
  }
  result.final_loss = subset_loss(net, rows, targets, train, d);
  if (!std::isfinite(result.final_loss)) {
    throw TrainingDiverged("training diverged: non-finite final loss");
  }
  return result;
}

std::vector<TrainResult> ensemble_train(const LabeledDataset& dataset,
                                        const ArchitectureDescriptor& arch,
                                        const TrainConfig& config,
                                        std::span<const std::uint64_t> seeds, int threads) {
  if (seeds.empty()) throw std::invalid_argument("ensemble needs at least one seed");
  std::vector<TrainResult> results;
  results.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) results.push_back({NeuralNet(arch), {}, {}, 0, 0});
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    TrainConfig member = config;
    member.seed = seeds[i];
    results[i] = nn_train(dataset, nn_init(arch, seeds[i]), member);
  });
  return results;
}

}  // namespace topoprobe
