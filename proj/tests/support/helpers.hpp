#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "topoprobe/lattice.hpp"

namespace testutil {

// Bit b set means spin b is -1.
inline topoprobe::SpinConfig config_from_bits(const topoprobe::LatticeGeometry& g, std::uint64_t bits,
                                              topoprobe::Basis basis = topoprobe::Basis::z) {
  auto c = topoprobe::SpinConfig::all_up(g, basis);
  for (int b = 0; b < g.bond_count(); ++b)
    if ((bits >> b) & 1U) c.values[b] = -1;
  return c;
}

inline std::uint64_t bits_from_config(const topoprobe::SpinConfig& c) {
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < c.values.size(); ++b)
    if (c.values[b] < 0) bits |= std::uint64_t{1} << b;
  return bits;
}

// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
#ifdef TOPOPROBE_TEST_TMP
  std::filesystem::path root = TOPOPROBE_TEST_TMP;
#else
  std::filesystem::path root = std::filesystem::temp_directory_path() / "topoprobe_tests";
#endif
  auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
