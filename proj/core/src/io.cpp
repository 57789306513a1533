#include "topoprobe/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace topoprobe {
namespace {

constexpr std::string_view kModelMagic = "TPRB1";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& where) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(where + ": not a number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in, const std::string& where) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw FormatError(where + ": truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, true);
  out << text;
}

void write_dataset(const std::filesystem::path& csv_path, const LabeledDataset& dataset) {
  const auto& m = dataset.meta;
  nlohmann::ordered_json side;
  side["format"] = "topoprobe-dataset";
  side["version"] = 1;
  side["kind"] = to_string(m.kind);
  side["n"] = m.n;
  side["role"] = m.role;
  side["beta_grid"] = m.beta_grid;
  side["per_beta"] = m.per_beta;
  side["seed"] = m.seed;
  side["therm_attempts"] = m.therm_attempts;
  side["stride_attempts"] = m.stride_attempts;
  side["symmetrized"] = m.symmetrized;
  side["field_preset"] = m.field_preset;
  side["mc_samples"] = m.mc_samples;
  side["basis"] = dataset.is_spin() && !dataset.configs.empty() && dataset.configs.front().basis == Basis::x
                      ? "x"
                      : "z";
  side["rows"] = dataset.size();
  side["width"] = 1 + dataset.input_dim();
  write_text(csv_path.string() + ".json", side.dump(2) + "\n");

  std::string body;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    body += format_double(dataset.labels[i]);
    if (dataset.is_spin()) {
      for (Spin s : dataset.configs[i].values) body += s > 0 ? ",1" : ",-1";
    } else {
      for (double v : dataset.vectors[i]) {
        body += ',';
        body += format_double(v);
      }
    }
    body += '\n';
  }
  write_text(csv_path, body);
}

LabeledDataset read_dataset(const std::filesystem::path& csv_path) {
  const std::string side_path = csv_path.string() + ".json";
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_text(side_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(side_path + ": " + e.what());
  }
  LabeledDataset ds;
  Basis basis = Basis::z;
  std::size_t rows = 0;
  try {
    if (side.at("format") != "topoprobe-dataset") throw FormatError(side_path + ": not a dataset sidecar");
    auto& m = ds.meta;
    m.kind = parse_model_kind(side.at("kind").get<std::string>());
    m.n = side.at("n").get<int>();
    m.role = side.value("role", std::string{});
    m.beta_grid = side.at("beta_grid").get<std::vector<double>>();
    m.per_beta = side.at("per_beta").get<int>();
    m.seed = side.at("seed").get<std::uint64_t>();
    m.therm_attempts = side.value("therm_attempts", 0L);
    m.stride_attempts = side.value("stride_attempts", 0L);
    m.symmetrized = side.value("symmetrized", false);
    m.field_preset = side.value("field_preset", std::string{});
    m.mc_samples = side.value("mc_samples", 0);
    basis = side.value("basis", std::string("z")) == "x" ? Basis::x : Basis::z;
    rows = side.at("rows").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(side_path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(side_path + ": " + e.what());
  }
  const auto width = static_cast<std::size_t>(1 + ds.input_dim());
  const auto lines = read_lines(csv_path);
  if (lines.size() != rows) {
    throw FormatError(csv_path.string() + ": expected " + std::to_string(rows) + " rows, found " +
                      std::to_string(lines.size()));
  }
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::string where = csv_path.string() + ":" + std::to_string(r + 1);
    const auto cells = split(lines[r], ',');
    if (cells.size() != width) {
      throw FormatError(where + ": expected " + std::to_string(width) + " columns");
    }
    ds.labels.push_back(parse_double(cells[0], where));
    if (ds.is_spin()) {
      SpinConfig c;
      c.basis = basis;
      c.values.reserve(width - 1);
      for (std::size_t k = 1; k < width; ++k) {
        const double v = parse_double(cells[k], where);
        if (v != 1.0 && v != -1.0) throw FormatError(where + ": spin must be 1 or -1");
        c.values.push_back(static_cast<Spin>(v));
      }
      ds.configs.push_back(std::move(c));
    } else {
      std::vector<double> v;
      v.reserve(width - 1);
      for (std::size_t k = 1; k < width; ++k) v.push_back(parse_double(cells[k], where));
      ds.vectors.push_back(std::move(v));
    }
  }
  return ds;
}

void write_model(const std::filesystem::path& path, const NeuralNet& model) {
  nlohmann::ordered_json header;
  header["architecture"] = nlohmann::ordered_json::parse(architecture_to_json(model.architecture()));
  header["label_scaling"] = {{"lo", model.scaling().lo}, {"hi", model.scaling().hi}};
  const std::string text = header.dump();
  auto out = open_out(path, true);
  out.write(kModelMagic.data(), static_cast<std::streamsize>(kModelMagic.size()));
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = model.parameters();
  put_u64(out, params.size());
  for (double p : params) put_u64(out, std::bit_cast<std::uint64_t>(p));
  if (!out) throw FormatError("failed writing " + path.string());
}

NeuralNet read_model(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + where);
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), 5) || std::string_view(magic.data(), 5) != kModelMagic) {
    throw FormatError(where + ": not a TPRB1 model file");
  }
  const auto header_len = get_u64(in, where);
  if (header_len > (1u << 24)) throw FormatError(where + ": header too large");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw FormatError(where + ": truncated");
  ArchitectureDescriptor arch;
  LabelScaling scaling;
  try {
    const auto header = nlohmann::json::parse(text);
    arch = parse_architecture(header.at("architecture").dump());
    scaling.lo = header.at("label_scaling").at("lo").get<double>();
    scaling.hi = header.at("label_scaling").at("hi").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
  NeuralNet net(arch, scaling);
  const auto count = get_u64(in, where);
  auto params = net.parameters();
  if (count != params.size()) {
    throw FormatError(where + ": parameter count " + std::to_string(count) +
                      " does not match the architecture (" + std::to_string(params.size()) + ")");
  }
  for (auto& p : params) p = std::bit_cast<double>(get_u64(in, where));
  return net;
}

void write_dos_model(const std::filesystem::path& path, const DosModel& model) {
  std::string body = "E,beta_av,count\n";
  for (const auto& [e, b] : model.beta_av) {
    const auto it = model.counts.find(e);
    body += std::to_string(e) + "," + format_double(b) + "," +
            std::to_string(it == model.counts.end() ? 0 : it->second) + "\n";
  }
  write_text(path, body);
}

DosModel read_dos_model(const std::filesystem::path& path) {
  const auto table = read_csv_table(path);
  const auto e = table.column("E");
  const auto b = table.column("beta_av");
  const auto c = table.column("count");
  DosModel model;
  for (std::size_t i = 0; i < e.size(); ++i) {
    model.beta_av[static_cast<int>(e[i])] = b[i];
    model.counts[static_cast<int>(e[i])] = static_cast<std::uint64_t>(c[i]);
  }
  return model;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw FormatError("missing CSV column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty CSV");
  CsvTable table;
  for (auto c : split(lines[0], ',')) table.columns.emplace_back(c);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(r + 1);
    const auto cells = split(lines[r], ',');
    if (cells.size() != table.columns.size()) throw FormatError(where + ": wrong column count");
    std::vector<double> row;
    for (auto c : cells) row.push_back(parse_double(c, where));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_prediction_curve(const std::filesystem::path& path, const PredictionCurve& curve) {
  std::string body = "beta,mean_pred,count,spread\n";
  for (std::size_t i = 0; i < curve.beta_labels.size(); ++i) {
    body += format_double(curve.beta_labels[i]) + "," + format_double(curve.mean_pred[i]) + "," +
            std::to_string(curve.counts[i]) + "," + format_double(curve.spread[i]) + "\n";
  }
  write_text(path, body);
}

PredictionCurve read_prediction_curve(const std::filesystem::path& path) {
  const auto table = read_csv_table(path);
  PredictionCurve curve;
  curve.beta_labels = table.column("beta");
  curve.mean_pred = table.column("mean_pred");
  for (double c : table.column("count")) curve.counts.push_back(static_cast<std::size_t>(c));
  curve.spread = table.column("spread");
  return curve;
}

void write_derivative_curve(const std::filesystem::path& path, const DerivativeCurve& curve) {
  std::string body = "beta,D\n";
  for (std::size_t i = 0; i < curve.beta.size(); ++i) {
    body += format_double(curve.beta[i]) + "," + format_double(curve.d[i]) + "\n";
  }
  write_text(path, body);
}

void write_chi_f_curve(const std::filesystem::path& path, const ChiFCurve& curve) {
  std::string body = "beta,chi_f,std_error\n";
  for (std::size_t i = 0; i < curve.beta_grid.size(); ++i) {
    body += format_double(curve.beta_grid[i]) + "," + format_double(curve.chi_values[i]) + "," +
            format_double(curve.std_errors[i]) + "\n";
  }
  write_text(path, body);
}

ChiFCurve read_chi_f_curve(const std::filesystem::path& path) {
  const auto table = read_csv_table(path);
  ChiFCurve curve;
  curve.beta_grid = table.column("beta");
  curve.chi_values = table.column("chi_f");
  curve.std_errors = table.column("std_error");
  return curve;
}

}  // namespace topoprobe
