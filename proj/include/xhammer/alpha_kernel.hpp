// Thermal coupling kernel: over-temperature of a cell at a relative offset,
// as a fraction of the heated cell's own over-temperature.
#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include <json.hpp>

#include "xhammer/common.hpp"

namespace xhammer {

struct AlphaEntry {
  double value = 0.0;
  double r_squared = 1.0;

  friend bool operator==(const AlphaEntry&, const AlphaEntry&) = default;
};

struct AlphaKernel {
  CellIndex source_cell;
  double r_th = 0.0;     // K/W
  double ambient = 300.0;  // K
  std::map<Offset, AlphaEntry> alpha;

  // Coefficient for an offset; offsets missing from the kernel couple with 0.
  double at(Offset d) const;
  // Sum of all coefficients except the self term.
  double coupling_sum() const;
  AlphaKernel with_ambient(double t0) const;

  // Kernel holding only the self term; cells are thermally isolated.
  static AlphaKernel isolated(double ambient, double r_th = 0.0);

  friend bool operator==(const AlphaKernel&, const AlphaKernel&) = default;
};

// Artifact schema:
//   {"ambient_K": .., "r_th_K_per_W": .., "source_cell": [row, col],
//    "alpha": [{"di":..,"dj":..,"value":..,"r2":..}]}
// source_cell is informational and optional on input.
// Entries are written in (di, dj) order.
nlohmann::ordered_json kernel_to_json(const AlphaKernel& kernel);
AlphaKernel kernel_from_json(const nlohmann::json& j);
AlphaKernel kernel_from_json(const nlohmann::ordered_json& j);

void save_kernel(const AlphaKernel& kernel, const std::filesystem::path& path);
AlphaKernel load_kernel(const std::filesystem::path& path);

}  // namespace xhammer
