#include "xhammer/alpha_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xhammer/error.hpp"
#include "xhammer/parallel.hpp"

namespace xhammer {

std::vector<double> default_sweep_powers() {
  std::vector<double> p(8);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = 200e-6 * static_cast<double>(k) / 7.0;
  return p;
}

PowerSweepSamples sweep_power(const ThermalGrid& grid, CellIndex source_cell,
                              std::vector<double> powers, double ambient,
                              const HeatSolverOptions& options, std::size_t threads) {
  if (source_cell.row >= grid.cell_rows() || source_cell.col >= grid.cell_cols()) {
    throw Error(ErrorCode::IndexOutOfRange, "source cell outside the crossbar");
  }
  for (double p : powers) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep powers must be >= 0");
  }
  std::sort(powers.begin(), powers.end());
  const std::set<double> distinct(powers.begin(), powers.end());
  if (distinct.size() < 4 || !distinct.contains(0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "power sweep needs at least 4 distinct values including 0");
  }

  PowerSweepSamples samples;
  samples.source_cell = source_cell;
  samples.ambient = ambient;
  samples.powers = powers;
  samples.temperatures.resize(powers.size());
  parallel_for(powers.size(), threads, [&](std::size_t k) {
    const HeatSource src = make_cell_source(grid, source_cell, powers[k]);
    const auto field = solve_steady_heat(grid, std::span(&src, 1), ambient, options);
    CellGrid<double> t(grid.cell_rows(), grid.cell_cols());
    for (const auto& [cell, temp] : field.cell_temperatures) t[cell] = temp;
    samples.temperatures[k] = std::move(t);
  });
  return samples;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::DegenerateFit, "need at least two samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateFit, "all abscissae are equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

ThermalResistanceFit fit_thermal_resistance(const PowerSweepSamples& samples) {
  std::vector<double> t;
  t.reserve(samples.temperatures.size());
  for (const auto& m : samples.temperatures) t.push_back(m[samples.source_cell]);
  const LinearFit f = fit_line(samples.powers, t);
  if (std::abs(f.intercept - samples.ambient) > 0.1) {
    throw Error(ErrorCode::DegenerateFit,
                "regression intercept " + std::to_string(f.intercept) +
                    " K does not reproduce the ambient " + std::to_string(samples.ambient) + " K");
  }
  return {f.slope, f.r_squared, f.intercept};
}

AlphaKernel extract_alpha_kernel(const PowerSweepSamples& samples, double r_th,
                                 double truncation) {
  if (!(r_th > 0.0)) throw Error(ErrorCode::InvalidArgument, "r_th must be > 0");
  if (samples.temperatures.empty()) throw Error(ErrorCode::DegenerateFit, "no samples");

  std::vector<double> x(samples.powers.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = r_th * samples.powers[k];

  AlphaKernel kernel;
  kernel.source_cell = samples.source_cell;
  kernel.r_th = r_th;
  kernel.ambient = samples.ambient;

  const auto rows = samples.temperatures.front().rows();
  const auto cols = samples.temperatures.front().cols();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = samples.temperatures[k](i, j);
      const LinearFit f = fit_line(x, y);
      const Offset d{static_cast<int>(i) - static_cast<int>(samples.source_cell.row),
                     static_cast<int>(j) - static_cast<int>(samples.source_cell.col)};
      const bool self = d == Offset{0, 0};
      if (self || f.slope >= truncation) kernel.alpha[d] = {f.slope, f.r_squared};
    }
  }
  return kernel;
}

}  // namespace xhammer
