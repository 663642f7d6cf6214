#include "xhammer/heat_solver.hpp"

#include <cmath>
#include <numeric>

#include "xhammer/error.hpp"

namespace xhammer {

double HeatSource::volumetric_density(const ThermalGrid& grid) const {
  if (source_voxels.empty()) return 0.0;
  return total_power / (static_cast<double>(source_voxels.size()) * grid.voxel_volume_m3());
}

HeatSource make_cell_source(const ThermalGrid& grid, CellIndex cell, double power) {
  if (!(power >= 0.0)) throw Error(ErrorCode::InvalidArgument, "source power must be >= 0");
  return HeatSource{cell, power, grid.filament_voxels(cell)};
}

std::map<CellIndex, double> cell_temperatures(const ThermalGrid& grid,
                                              std::span<const double> values) {
  std::map<CellIndex, double> out;
  for (const auto& [cell, voxels] : grid.filament_voxels()) {
    double sum = 0.0;
    for (auto v : voxels) sum += values[v];
    out[cell] = sum / static_cast<double>(voxels.size());
  }
  return out;
}

namespace {

// Face conductances (W/K) to the +x, +y, +z neighbour; zero on adiabatic walls.
struct Stencil {
  std::vector<double> cx, cy, cz, diag;
};

Stencil assemble(const ThermalGrid& grid) {
  const auto& d = grid.dims();
  const auto& k = grid.kappa();
  const double h = grid.voxel_size_m();
  const std::size_t sx = 1, sy = d.nx, sz = d.nx * d.ny;
  auto face = [&](std::size_t a, std::size_t b) { return 2.0 * k[a] * k[b] / (k[a] + k[b]) * h; };

  Stencil st;
  const std::size_t n = d.count();
  st.cx.assign(n, 0.0);
  st.cy.assign(n, 0.0);
  st.cz.assign(n, 0.0);
  st.diag.assign(n, 0.0);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = grid.index(x, y, z);
        if (x + 1 < d.nx) st.cx[i] = face(i, i + sx);
        if (y + 1 < d.ny) st.cy[i] = face(i, i + sy);
        if (z + 1 < d.nz) st.cz[i] = face(i, i + sz);
      }
    }
  }
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = grid.index(x, y, z);
        double s = st.cx[i] + st.cy[i] + st.cz[i];
        if (x > 0) s += st.cx[i - sx];
        if (y > 0) s += st.cy[i - sy];
        if (z > 0) s += st.cz[i - sz];
        st.diag[i] = s;
      }
    }
  }
  return st;
}

// out = A * p over free voxels; entries of p on pinned voxels must be zero.
void apply(const ThermalGrid& grid, const Stencil& st, const std::vector<double>& p,
           std::vector<double>& out) {
  const auto& d = grid.dims();
  const auto& mask = grid.dirichlet_mask();
  const std::size_t sy = d.nx, sz = d.nx * d.ny;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      std::size_t i = grid.index(0, y, z);
      for (std::size_t x = 0; x < d.nx; ++x, ++i) {
        if (mask[i]) {
          out[i] = 0.0;
          continue;
        }
        double v = st.diag[i] * p[i];
        if (x > 0) v -= st.cx[i - 1] * p[i - 1];
        if (x + 1 < d.nx) v -= st.cx[i] * p[i + 1];
        if (y > 0) v -= st.cy[i - sy] * p[i - sy];
        if (y + 1 < d.ny) v -= st.cy[i] * p[i + sy];
        if (z > 0) v -= st.cz[i - sz] * p[i - sz];
        if (z + 1 < d.nz) v -= st.cz[i] * p[i + sz];
        out[i] = v;
      }
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TemperatureField solve_steady_heat(const ThermalGrid& grid, std::span<const HeatSource> sources,
                                   double ambient, const HeatSolverOptions& options) {
  if (!(options.tol > 0.0 && options.tol <= 1e-4)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerance must lie in (0, 1e-4]");
  }
  if (grid.dirichlet_count() == 0) {
    throw Error(ErrorCode::SingularSystem, "no voxel is pinned at ambient");
  }
  const std::size_t n = grid.dims().count();
  const auto& mask = grid.dirichlet_mask();

  // Right-hand side: power deposited per voxel (W).
  std::vector<double> b(n, 0.0);
  for (const auto& src : sources) {
    if (!(src.total_power >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "source power must be >= 0");
    }
    if (src.source_voxels.empty()) {
      throw Error(ErrorCode::InvalidArgument, "heat source has no voxels");
    }
    const double per_voxel = src.total_power / static_cast<double>(src.source_voxels.size());
    for (auto v : src.source_voxels) {
      if (v >= n) throw Error(ErrorCode::IndexOutOfRange, "source voxel outside grid");
      if (!mask[v]) b[v] += per_voxel;
    }
  }

  TemperatureField field;
  const double b_norm = std::sqrt(dot(b, b));
  std::vector<double> theta(n, 0.0);
  if (b_norm > 0.0) {
    const Stencil st = assemble(grid);
    std::vector<double> inv_diag(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i] && st.diag[i] > 0.0) inv_diag[i] = 1.0 / st.diag[i];
    }

    std::vector<double> r = b, z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
    p = z;
    double rz = dot(r, z);
    double rel = 1.0;
    const std::size_t cap = options.max_iterations > 0 ? options.max_iterations : 50'000;
    std::size_t it = 0;
    while (rel > options.tol) {
      if (it == cap) {
        throw ConvergenceError("steady heat solve did not converge", rel, it);
      }
      apply(grid, st, p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw Error(ErrorCode::SingularSystem, "operator is not positive definite");
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        theta[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      ++it;
      rel = std::sqrt(dot(r, r)) / b_norm;
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // Report the true residual rather than the recurrence estimate.
    apply(grid, st, theta, q);
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) res2 += (b[i] - q[i]) * (b[i] - q[i]);
    }
    field.iterations = it;
    field.relative_residual = std::sqrt(res2) / b_norm;
  }

  field.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) field.values[i] = ambient + theta[i];
  field.cell_temperatures = cell_temperatures(grid, field.values);
  return field;
}

}  // namespace xhammer
