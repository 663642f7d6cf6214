// Line biasing and per-cell electrical quantities of a passive m x n crossbar.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xhammer/alpha_kernel.hpp"
#include "xhammer/common.hpp"
#include "xhammer/device_model.hpp"

namespace xhammer {

struct LineVoltages {
  std::vector<double> word_lines;  // one per row, V
  std::vector<double> bit_lines;   // one per column, V

  static LineVoltages zeros(std::size_t rows, std::size_t cols);
  bool all_zero() const;
};

struct CrossbarInstance {
  CellGrid<DeviceState> states;
  DeviceParams params;
  AlphaKernel alpha_kernel;
  double wire_resistance_per_segment = 0.0;  // ohm; 0 selects ideal drivers
  double ambient = 300.0;                     // K

  std::size_t rows() const { return states.rows(); }
  std::size_t cols() const { return states.cols(); }

  // m x n crossbar with every cell at `x_init` and at ambient temperature.
  static CrossbarInstance make(std::size_t rows, std::size_t cols, const DeviceParams& params,
                               AlphaKernel kernel, double ambient, double x_init);
  void validate() const;
};

// V/2 scheme: selected word line at v_set, selected bit line grounded, every
// other line at v_set/2.
LineVoltages bias_lines(CellIndex target, double v_set, std::size_t rows, std::size_t cols);

// Simultaneous selection of several cells. Targets must share a row or share
// a column so that no unintended cell becomes fully selected.
LineVoltages bias_lines(std::span<const CellIndex> targets, double v_set, std::size_t rows,
                        std::size_t cols);

// True when the targets can be selected together by bias_lines.
bool simultaneously_selectable(std::span<const CellIndex> targets);

CellGrid<double> cell_voltages_ideal(const LineVoltages& lines);

// Nodal analysis with a resistive segment between neighbouring crosspoints and
// ideal drivers at both ends of every line.
CellGrid<double> solve_cell_voltages_wired(const CrossbarInstance& xbar, const LineVoltages& lines);

// Node potentials of the wired network: word-line nodes then bit-line nodes,
// each m x n row-major. Exposed for Kirchhoff checks.
struct WiredSolution {
  CellGrid<double> word_nodes;
  CellGrid<double> bit_nodes;
};
WiredSolution solve_wired_network(const CrossbarInstance& xbar, const LineVoltages& lines);

// Ideal or wired depending on the instance's wire resistance.
CellGrid<double> cell_voltages(const CrossbarInstance& xbar, const LineVoltages& lines);

// V^2 * G(x) per cell.
CellGrid<double> cell_powers(const CellGrid<double>& v, const CrossbarInstance& xbar);

}  // namespace xhammer
