// Voxel model of a passive crossbar stack for the steady-state heat solve.
//
// Layer order, bottom to top:
//   substrate       (bottom voxel layer held at ambient)
//   insulator
//   bottom electrodes, one per column, running along the row direction (y)
//   switching oxide (blanket) with one cylindrical filament per crosspoint
//   top electrodes, one per row, running along the column direction (x)
// Electrode layers are back-filled with insulator between the lines. All
// faces other than the substrate bottom are adiabatic.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xhammer/common.hpp"

namespace xhammer {

// Thermal conductivities in W/(m K).
struct MaterialConductivities {
  double substrate = 150.0;  // Si
  double insulator = 1.4;    // SiO2
  double electrode = 72.0;   // Pt
  double oxide = 0.5;        // HfO2
  double filament = 5.0;

  friend bool operator==(const MaterialConductivities&, const MaterialConductivities&) = default;
};

// All lengths in nm.
struct CrossbarGeometry {
  std::size_t rows = 5;
  std::size_t cols = 5;
  double electrode_spacing = 50.0;
  double electrode_width = 25.0;
  double electrode_thickness = 10.0;
  double oxide_thickness = 5.0;
  double substrate_thickness = 50.0;
  double insulator_thickness = 20.0;
  // Padding between the outermost electrode edge and the domain side walls.
  double lateral_margin = 25.0;
  double filament_radius = 2.5;
  MaterialConductivities material_conductivities;

  // Empty when every invariant holds; otherwise one "field: reason" entry per violation.
  std::vector<std::string> violations() const;

  friend bool operator==(const CrossbarGeometry&, const CrossbarGeometry&) = default;
};

struct VoxelDims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  friend bool operator==(const VoxelDims&, const VoxelDims&) = default;
};

class ThermalGrid {
 public:
  ThermalGrid(VoxelDims dims, double voxel_size_nm, std::vector<double> kappa,
              std::vector<std::uint8_t> dirichlet_mask);

  // Homogeneous block with the bottom voxel layer pinned at ambient.
  static ThermalGrid uniform(VoxelDims dims, double voxel_size_nm, double kappa);

  const VoxelDims& dims() const { return dims_; }
  double voxel_size_nm() const { return voxel_size_nm_; }
  double voxel_size_m() const { return voxel_size_nm_ * 1e-9; }
  double voxel_volume_m3() const;
  const std::vector<double>& kappa() const { return kappa_; }
  const std::vector<std::uint8_t>& dirichlet_mask() const { return dirichlet_; }
  std::size_t dirichlet_count() const;

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  struct Coord {
    std::size_t x, y, z;
  };
  Coord coord(std::size_t index) const;

  // Crossbar cell registry; empty for grids not built from a geometry.
  std::size_t cell_rows() const { return cell_rows_; }
  std::size_t cell_cols() const { return cell_cols_; }
  const std::map<CellIndex, std::size_t>& cell_probe_index() const { return probes_; }
  const std::map<CellIndex, std::vector<std::size_t>>& filament_voxels() const { return filaments_; }
  const std::vector<std::size_t>& filament_voxels(CellIndex cell) const;

  void register_cell(CellIndex cell, std::size_t probe, std::vector<std::size_t> filament);
  void set_cell_shape(std::size_t rows, std::size_t cols);

 private:
  VoxelDims dims_;
  double voxel_size_nm_;
  std::vector<double> kappa_;
  std::vector<std::uint8_t> dirichlet_;
  std::size_t cell_rows_ = 0;
  std::size_t cell_cols_ = 0;
  std::map<CellIndex, std::size_t> probes_;
  std::map<CellIndex, std::vector<std::size_t>> filaments_;
};

inline constexpr std::size_t kDefaultVoxelBudget = 10'000'000;

// Number of voxels a geometry length occupies; throws GeometryInconsistent when
// the length is thinner than half a voxel.
std::size_t voxel_count_for(double length_nm, double voxel_size_nm, const char* what);

ThermalGrid build_grid(const CrossbarGeometry& geom, double voxel_size_nm,
                       std::size_t max_voxels = kDefaultVoxelBudget);

}  // namespace xhammer
