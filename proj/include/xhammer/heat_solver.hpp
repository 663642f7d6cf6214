// Steady-state conduction, -div(kappa grad T) = q, on a ThermalGrid.
//
// 7-point finite-volume stencil with harmonic-mean face conductivities.
// Masked voxels are held at ambient; every domain face without a masked
// voxel is adiabatic. The SPD system for the over-temperature T - T0 is
// solved with Jacobi-preconditioned conjugate gradients.
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "xhammer/common.hpp"
#include "xhammer/thermal_grid.hpp"

namespace xhammer {

struct HeatSource {
  CellIndex cell;
  double total_power = 0.0;  // W
  std::vector<std::size_t> source_voxels;

  double volumetric_density(const ThermalGrid& grid) const;  // W/m^3
};

// Uniform source over the filament region of one crossbar cell.
HeatSource make_cell_source(const ThermalGrid& grid, CellIndex cell, double power);

struct TemperatureField {
  std::vector<double> values;  // K, one per voxel
  // Mean filament temperature of every registered crossbar cell.
  std::map<CellIndex, double> cell_temperatures;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

struct HeatSolverOptions {
  double tol = 1e-9;                  // relative residual ||Ax-b||/||b||, in (0, 1e-4]
  std::size_t max_iterations = 0;     // 0 selects a size-dependent cap
};

TemperatureField solve_steady_heat(const ThermalGrid& grid, std::span<const HeatSource> sources,
                                   double ambient, const HeatSolverOptions& options = {});

// Mean temperature over the filament voxels of each registered cell.
std::map<CellIndex, double> cell_temperatures(const ThermalGrid& grid,
                                              std::span<const double> values);

}  // namespace xhammer
