// Power sweep over one heated cell and the linear regressions that turn it
// into a thermal resistance and a coupling kernel.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xhammer/alpha_kernel.hpp"
#include "xhammer/common.hpp"
#include "xhammer/heat_solver.hpp"
#include "xhammer/thermal_grid.hpp"

namespace xhammer {

struct PowerSweepSamples {
  CellIndex source_cell;
  double ambient = 300.0;
  std::vector<double> powers;                  // W, ascending
  std::vector<CellGrid<double>> temperatures;  // K, one cell matrix per power
};

// Default sweep: 8 evenly spaced points over [0, 200] uW.
std::vector<double> default_sweep_powers();

// One independent steady solve per power, spread over `threads` workers.
PowerSweepSamples sweep_power(const ThermalGrid& grid, CellIndex source_cell,
                              std::vector<double> powers, double ambient,
                              const HeatSolverOptions& options = {}, std::size_t threads = 1);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope * x. Throws DegenerateFit when
// fewer than two distinct x values are given.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ThermalResistanceFit {
  double r_th = 0.0;  // K/W
  double r_squared = 0.0;
  double intercept = 0.0;  // K
};

// Source-cell temperature against power. The intercept has to reproduce the
// ambient within 0.1 K.
ThermalResistanceFit fit_thermal_resistance(const PowerSweepSamples& samples);

inline constexpr double kAlphaTruncation = 1e-3;

AlphaKernel extract_alpha_kernel(const PowerSweepSamples& samples, double r_th,
                                 double truncation = kAlphaTruncation);

}  // namespace xhammer
