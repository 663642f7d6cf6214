#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "xhammer/crossbar_circuit.hpp"
#include "xhammer/error.hpp"

using namespace xhammer;

namespace {

CrossbarInstance instance(std::size_t m, std::size_t n, double x, double wire) {
  CrossbarInstance xb = CrossbarInstance::make(m, n, DeviceParams{}, AlphaKernel::isolated(300.0), 300.0, x);
  xb.wire_resistance_per_segment = wire;
  return xb;
}

// Kirchhoff current sum at every node of the wired network, written out
// edge by edge.
double max_kcl_residual(const CrossbarInstance& xb, const LineVoltages& lines, const WiredSolution& s) {
  const std::size_t m = xb.rows(), n = xb.cols();
  const double gw = 1.0 / xb.wire_resistance_per_segment;
  CellGrid<double> iw(m, n, 0.0), ib(m, n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    iw(i, 0) += gw * (lines.word_lines[i] - s.word_nodes(i, 0));
    iw(i, n - 1) += gw * (lines.word_lines[i] - s.word_nodes(i, n - 1));
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double c = gw * (s.word_nodes(i, j + 1) - s.word_nodes(i, j));
      iw(i, j) += c;
      iw(i, j + 1) -= c;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    ib(0, j) += gw * (lines.bit_lines[j] - s.bit_nodes(0, j));
    ib(m - 1, j) += gw * (lines.bit_lines[j] - s.bit_nodes(m - 1, j));
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double c = gw * (s.bit_nodes(i + 1, j) - s.bit_nodes(i, j));
      ib(i, j) += c;
      ib(i + 1, j) -= c;
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dev = conductance(xb.states(i, j).x, xb.params) * (s.word_nodes(i, j) - s.bit_nodes(i, j));
      worst = std::max({worst, std::abs(iw(i, j) - dev), std::abs(ib(i, j) + dev)});
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("V/2 biasing of a 5x5 array") {
  const LineVoltages l = bias_lines({2, 2}, 1.05, 5, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(l.word_lines[k] == (k == 2 ? 1.05 : 0.525));
    CHECK(l.bit_lines[k] == (k == 2 ? 0.0 : 0.525));
  }
  const CellGrid<double> v = cell_voltages_ideal(l);
  CHECK(v(2, 2) == 1.05);
  CHECK(v(2, 4) == 0.525);
  CHECK(v(0, 0) == 0.0);
}

TEST_CASE("degenerate biasing") {
  const LineVoltages one = bias_lines({0, 0}, 1.05, 1, 1);
  CHECK(one.word_lines == std::vector<double>{1.05});
  CHECK(one.bit_lines == std::vector<double>{0.0});
  CHECK(bias_lines({1, 3}, 0.0, 4, 6).all_zero());
  CHECK(LineVoltages::zeros(3, 2).all_zero());
  const CellGrid<double> idle = cell_voltages_ideal(LineVoltages::zeros(3, 2));
  for (double x : idle.values()) CHECK(x == 0.0);
  try {
    bias_lines({5, 0}, 1.0, 5, 5);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("ideal cell voltages partition into selected, half-selected and unselected") {
  for (std::size_t m = 1; m <= 7; ++m) {
    for (std::size_t n = 1; n <= 7; ++n) {
      for (std::size_t ti = 0; ti < m; ++ti) {
        for (std::size_t tj = 0; tj < n; ++tj) {
          const double v = 1.05;
          const CellGrid<double> cv = cell_voltages_ideal(bias_lines({ti, tj}, v, m, n));
          std::size_t full = 0, half = 0, none = 0;
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              const double x = cv(i, j);
              if (i == ti && j == tj) {
                CHECK(x == v);
                ++full;
              } else if (i == ti || j == tj) {
                CHECK(x == v / 2);
                ++half;
              } else {
                CHECK(x == 0.0);
                ++none;
              }
            }
          }
          CHECK(full == 1);
          CHECK(half == (m - 1) + (n - 1));
          CHECK(none == (m - 1) * (n - 1));
        }
      }
    }
  }
}

TEST_CASE("simultaneous selection along a shared line") {
  const std::vector<CellIndex> row = {{1, 0}, {1, 3}};
  CHECK(simultaneously_selectable(row));
  const CellGrid<double> v = cell_voltages_ideal(bias_lines(row, 1.0, 4, 4));
  CHECK(v(1, 0) == 1.0);
  CHECK(v(1, 3) == 1.0);
  CHECK(v(1, 1) == 0.5);
  CHECK(v(0, 0) == 0.5);
  CHECK(v(0, 1) == 0.0);
  const std::vector<CellIndex> diagonal = {{0, 0}, {1, 1}};
  CHECK_FALSE(simultaneously_selectable(diagonal));
  CHECK_THROWS_AS(bias_lines(diagonal, 1.0, 4, 4), Error);
}

TEST_CASE("cell powers") {
  CrossbarInstance xb = instance(5, 5, 1.0, 0.0);
  const CellGrid<double> v = cell_voltages_ideal(bias_lines({2, 2}, 1.05, 5, 5));
  const CellGrid<double> p = cell_powers(v, xb);
  CHECK(p(2, 2) == doctest::Approx(110.25e-6));
  CHECK(p(2, 3) == doctest::Approx(p(2, 2) / 4.0));
  CHECK(p(0, 0) == 0.0);

  const CellGrid<double> v2 = cell_voltages_ideal(bias_lines({2, 2}, 0.7 * 1.05, 5, 5));
  const CellGrid<double> p2 = cell_powers(v2, xb);
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(p2.values()[k] >= 0.0);
    CHECK(p2.values()[k] == doctest::Approx(0.49 * p.values()[k]));
  }
}

TEST_CASE("wired network against an independent dense nodal solve") {
  const CrossbarInstance xb = instance(2, 2, 1.0, 50.0);
  const LineVoltages l = bias_lines({0, 0}, 1.05, 2, 2);
  // Unknowns: w00 w01 w10 w11 b00 b01 b10 b11.
  const double gw = 1.0 / 50.0, gd = 1e-4;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, 8);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(8);
  auto edge = [&](int p, int q, double g) {
    a(p, p) += g;
    a(q, q) += g;
    a(p, q) -= g;
    a(q, p) -= g;
  };
  auto source = [&](int p, double g, double v) {
    a(p, p) += g;
    rhs[p] += g * v;
  };
  // Word line i: driver - w(i,0) - w(i,1) - driver.
  for (int i = 0; i < 2; ++i) {
    source(2 * i, gw, l.word_lines[i]);
    source(2 * i + 1, gw, l.word_lines[i]);
    edge(2 * i, 2 * i + 1, gw);
  }
  // Bit line j: driver - b(0,j) - b(1,j) - driver.
  for (int j = 0; j < 2; ++j) {
    source(4 + j, gw, l.bit_lines[j]);
    source(6 + j, gw, l.bit_lines[j]);
    edge(4 + j, 6 + j, gw);
  }
  for (int k = 0; k < 4; ++k) edge(k, 4 + k, gd);
  const Eigen::VectorXd phi = a.fullPivLu().solve(rhs);

  const WiredSolution s = solve_wired_network(xb, l);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(s.word_nodes(i, j) - phi[static_cast<Eigen::Index>(2 * i + j)]) <= 1e-9);
      CHECK(std::abs(s.bit_nodes(i, j) - phi[static_cast<Eigen::Index>(4 + 2 * i + j)]) <= 1e-9);
    }
  }
  CHECK(max_kcl_residual(xb, l, s) <= 1e-10);
}

TEST_CASE("wired mode approaches ideal drivers and loses voltage with wire resistance") {
  const LineVoltages l = bias_lines({2, 3}, 1.05, 5, 6);
  const CellGrid<double> ideal = cell_voltages_ideal(l);
  const CellGrid<double> tiny = cell_voltages(instance(5, 6, 0.7, 1e-6), l);
  for (std::size_t k = 0; k < ideal.size(); ++k) CHECK(std::abs(tiny.values()[k] - ideal.values()[k]) <= 1e-6);

  double prev = 1.05;
  for (double r : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const CrossbarInstance xb = instance(5, 6, 1.0, r);
    const double v = solve_cell_voltages_wired(xb, l)(2, 3);
    CHECK(v < prev);
    prev = v;
    CHECK(max_kcl_residual(xb, l, solve_wired_network(xb, l)) <= 1e-10);
  }
}

TEST_CASE("instance validation") {
  CrossbarInstance xb = instance(3, 3, 0.2, 0.0);
  CHECK_NOTHROW(xb.validate());
  xb.states(1, 1).x = 2.0;
  CHECK_THROWS_AS(xb.validate(), Error);
  CHECK_THROWS_AS(cell_voltages(instance(3, 3, 0.0, 0.0), bias_lines({0, 0}, 1.0, 2, 3)), Error);
}
