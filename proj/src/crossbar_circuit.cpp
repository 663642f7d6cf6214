#include "xhammer/crossbar_circuit.hpp"

#include <cmath>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "xhammer/error.hpp"

namespace xhammer {

LineVoltages LineVoltages::zeros(std::size_t rows, std::size_t cols) {
  return {std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
}

bool LineVoltages::all_zero() const {
  for (double v : word_lines) {
    if (v != 0.0) return false;
  }
  for (double v : bit_lines) {
    if (v != 0.0) return false;
  }
  return true;
}

CrossbarInstance CrossbarInstance::make(std::size_t rows, std::size_t cols,
                                        const DeviceParams& params, AlphaKernel kernel,
                                        double ambient, double x_init) {
  CrossbarInstance xbar;
  xbar.states = CellGrid<DeviceState>(rows, cols, DeviceState{x_init, ambient});
  xbar.params = params;
  xbar.alpha_kernel = std::move(kernel);
  xbar.ambient = ambient;
  xbar.validate();
  return xbar;
}

void CrossbarInstance::validate() const {
  if (rows() < 1 || cols() < 1) throw Error(ErrorCode::ConfigInvalid, "crossbar must be at least 1x1");
  if (std::abs(alpha_kernel.ambient - ambient) > 1e-9) {
    throw Error(ErrorCode::ConfigInvalid, "kernel ambient differs from crossbar ambient");
  }
  if (!(wire_resistance_per_segment >= 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "wire resistance must be >= 0");
  }
  if (auto v = params.violations(); !v.empty()) throw ValidationError(v);
  for (const auto& s : states.values()) {
    if (!(s.x >= params.x_min && s.x <= params.x_max)) {
      throw Error(ErrorCode::ConfigInvalid, "cell state outside [x_min, x_max]");
    }
  }
}

bool simultaneously_selectable(std::span<const CellIndex> targets) {
  if (targets.empty()) return false;
  bool same_row = true, same_col = true;
  for (const auto& t : targets) {
    same_row = same_row && t.row == targets.front().row;
    same_col = same_col && t.col == targets.front().col;
  }
  return same_row || same_col;
}

LineVoltages bias_lines(CellIndex target, double v_set, std::size_t rows, std::size_t cols) {
  return bias_lines(std::span(&target, 1), v_set, rows, cols);
}

LineVoltages bias_lines(std::span<const CellIndex> targets, double v_set, std::size_t rows,
                        std::size_t cols) {
  if (!(v_set >= 0.0 && v_set <= kMaxDeviceVoltage)) {
    throw Error(ErrorCode::VoltageOutOfRange, "v_set must lie in [0, 2] V");
  }
  if (!simultaneously_selectable(targets)) {
    throw Error(ErrorCode::InvalidArgument, "targets must share one row or one column");
  }
  LineVoltages lines{std::vector<double>(rows, v_set / 2.0), std::vector<double>(cols, v_set / 2.0)};
  for (const auto& t : targets) {
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::IndexOutOfRange, "target (" + std::to_string(t.row) + "," +
                                                  std::to_string(t.col) + ") outside crossbar");
    }
    lines.word_lines[t.row] = v_set;
    lines.bit_lines[t.col] = 0.0;
  }
  return lines;
}

CellGrid<double> cell_voltages_ideal(const LineVoltages& lines) {
  CellGrid<double> v(lines.word_lines.size(), lines.bit_lines.size());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) = lines.word_lines[i] - lines.bit_lines[j];
  }
  return v;
}

WiredSolution solve_wired_network(const CrossbarInstance& xbar, const LineVoltages& lines) {
  const std::size_t m = xbar.rows(), n = xbar.cols();
  if (lines.word_lines.size() != m || lines.bit_lines.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "line voltages do not match crossbar shape");
  }
  if (!(xbar.wire_resistance_per_segment > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "wired solve needs a positive wire resistance");
  }
  const double gw = 1.0 / xbar.wire_resistance_per_segment;
  const auto word = [n](std::size_t i, std::size_t j) { return static_cast<int>(i * n + j); };
  const auto bit = [m, n](std::size_t i, std::size_t j) { return static_cast<int>(m * n + i * n + j); };
  const int size = static_cast<int>(2 * m * n);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  auto couple = [&](int a, int b, double g) {
    trip.emplace_back(a, a, g);
    trip.emplace_back(b, b, g);
    trip.emplace_back(a, b, -g);
    trip.emplace_back(b, a, -g);
  };
  auto drive = [&](int a, double g, double v) {
    trip.emplace_back(a, a, g);
    rhs[a] += g * v;
  };
  for (std::size_t i = 0; i < m; ++i) {
    drive(word(i, 0), gw, lines.word_lines[i]);
    drive(word(i, n - 1), gw, lines.word_lines[i]);
    for (std::size_t j = 0; j + 1 < n; ++j) couple(word(i, j), word(i, j + 1), gw);
  }
  for (std::size_t j = 0; j < n; ++j) {
    drive(bit(0, j), gw, lines.bit_lines[j]);
    drive(bit(m - 1, j), gw, lines.bit_lines[j]);
    for (std::size_t i = 0; i + 1 < m; ++i) couple(bit(i, j), bit(i + 1, j), gw);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) couple(word(i, j), bit(i, j), conductance(xbar.states(i, j).x, xbar.params));
  }

  Eigen::SparseMatrix<double> a(size, size);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, "crossbar nodal matrix could not be factorized");
  }
  const Eigen::VectorXd phi = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !phi.allFinite()) {
    throw Error(ErrorCode::SingularMatrix, "crossbar nodal solve failed");
  }
  WiredSolution sol{CellGrid<double>(m, n), CellGrid<double>(m, n)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sol.word_nodes(i, j) = phi[word(i, j)];
      sol.bit_nodes(i, j) = phi[bit(i, j)];
    }
  }
  return sol;
}

CellGrid<double> solve_cell_voltages_wired(const CrossbarInstance& xbar, const LineVoltages& lines) {
  const WiredSolution sol = solve_wired_network(xbar, lines);
  CellGrid<double> v(xbar.rows(), xbar.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) = sol.word_nodes(i, j) - sol.bit_nodes(i, j);
  }
  return v;
}

CellGrid<double> cell_voltages(const CrossbarInstance& xbar, const LineVoltages& lines) {
  if (xbar.wire_resistance_per_segment > 0.0) return solve_cell_voltages_wired(xbar, lines);
  if (lines.word_lines.size() != xbar.rows() || lines.bit_lines.size() != xbar.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "line voltages do not match crossbar shape");
  }
  return cell_voltages_ideal(lines);
}

CellGrid<double> cell_powers(const CellGrid<double>& v, const CrossbarInstance& xbar) {
  if (!v.same_shape(xbar.states)) throw Error(ErrorCode::ShapeMismatch, "voltage grid shape");
  CellGrid<double> p(v.rows(), v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      p(i, j) = v(i, j) * v(i, j) * conductance(xbar.states(i, j).x, xbar.params);
    }
  }
  return p;
}

}  // namespace xhammer
