#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "topoprobe/dataset.hpp"
#include "topoprobe/detector.hpp"
#include "topoprobe/dos.hpp"
#include "topoprobe/fidelity.hpp"
#include "topoprobe/nn.hpp"

namespace topoprobe {

/// Malformed or unreadable artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Dataset as CSV body (label, then the input row; spins as 1/-1) plus a
/// JSON sidecar at `<path>.json` with the provenance.
void write_dataset(const std::filesystem::path& csv_path, const LabeledDataset& dataset);
LabeledDataset read_dataset(const std::filesystem::path& csv_path);

/// Binary model: "TPRB1", u64 header length, JSON header (architecture and
/// label scaling), u64 parameter count, little-endian float64 parameters.
void write_model(const std::filesystem::path& path, const NeuralNet& model);
NeuralNet read_model(const std::filesystem::path& path);

/// DoS model as CSV with columns E, beta_av, count.
void write_dos_model(const std::filesystem::path& path, const DosModel& model);
DosModel read_dos_model(const std::filesystem::path& path);

/// Curves as CSV with a header row.
void write_prediction_curve(const std::filesystem::path& path, const PredictionCurve& curve);
PredictionCurve read_prediction_curve(const std::filesystem::path& path);
void write_derivative_curve(const std::filesystem::path& path, const DerivativeCurve& curve);
void write_chi_f_curve(const std::filesystem::path& path, const ChiFCurve& curve);
ChiFCurve read_chi_f_curve(const std::filesystem::path& path);

/// Generic numeric CSV: header names and rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace topoprobe
