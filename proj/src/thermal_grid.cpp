#include "xhammer/thermal_grid.hpp"

#include <cmath>

#include "xhammer/error.hpp"

namespace xhammer {

std::vector<std::string> CrossbarGeometry::violations() const {
  std::vector<std::string> out;
  if (rows < 1) out.push_back("rows: must be >= 1");
  if (cols < 1) out.push_back("cols: must be >= 1");
  const std::pair<const char*, double> lengths[] = {
      {"electrode_spacing", electrode_spacing},     {"electrode_width", electrode_width},
      {"electrode_thickness", electrode_thickness}, {"oxide_thickness", oxide_thickness},
      {"substrate_thickness", substrate_thickness}, {"insulator_thickness", insulator_thickness},
      {"filament_radius", filament_radius},
  };
  for (const auto& [name, value] : lengths) {
    if (!(value > 0.0) || !std::isfinite(value)) out.push_back(std::string(name) + ": must be > 0");
  }
  if (!(lateral_margin >= 0.0) || !std::isfinite(lateral_margin)) {
    out.push_back("lateral_margin: must be >= 0");
  }
  if (!(electrode_spacing >= 1.0 && electrode_spacing <= 1000.0)) {
    out.push_back("electrode_spacing: must lie in [1, 1000] nm");
  }
  if (!(filament_radius < electrode_width / 2.0)) {
    out.push_back("filament_radius: must be smaller than electrode_width/2");
  }
  const std::pair<const char*, double> kappas[] = {
      {"substrate", material_conductivities.substrate},
      {"insulator", material_conductivities.insulator},
      {"electrode", material_conductivities.electrode},
      {"oxide", material_conductivities.oxide},
      {"filament", material_conductivities.filament},
  };
  for (const auto& [name, value] : kappas) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      out.push_back(std::string("material_conductivities.") + name + ": must be > 0");
    }
  }
  return out;
}

ThermalGrid::ThermalGrid(VoxelDims dims, double voxel_size_nm, std::vector<double> kappa,
                         std::vector<std::uint8_t> dirichlet_mask)
    : dims_(dims),
      voxel_size_nm_(voxel_size_nm),
      kappa_(std::move(kappa)),
      dirichlet_(std::move(dirichlet_mask)) {
  if (dims_.count() == 0) throw Error(ErrorCode::InvalidArgument, "grid has no voxels");
  if (!(voxel_size_nm_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be > 0");
  if (kappa_.size() != dims_.count() || dirichlet_.size() != dims_.count()) {
    throw Error(ErrorCode::ShapeMismatch, "per-voxel arrays do not match grid dimensions");
  }
  for (double k : kappa_) {
    if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "thermal conductivity must be > 0");
  }
}

ThermalGrid ThermalGrid::uniform(VoxelDims dims, double voxel_size_nm, double kappa) {
  std::vector<std::uint8_t> mask(dims.count(), 0);
  for (std::size_t i = 0; i < dims.nx * dims.ny; ++i) mask[i] = 1;
  return ThermalGrid(dims, voxel_size_nm, std::vector<double>(dims.count(), kappa),
                     std::move(mask));
}

double ThermalGrid::voxel_volume_m3() const {
  const double h = voxel_size_m();
  return h * h * h;
}

std::size_t ThermalGrid::dirichlet_count() const {
  std::size_t n = 0;
  for (auto d : dirichlet_) n += d != 0;
  return n;
}

ThermalGrid::Coord ThermalGrid::coord(std::size_t index) const {
  const std::size_t x = index % dims_.nx;
  const std::size_t rest = index / dims_.nx;
  return {x, rest % dims_.ny, rest / dims_.ny};
}

const std::vector<std::size_t>& ThermalGrid::filament_voxels(CellIndex cell) const {
  auto it = filaments_.find(cell);
  if (it == filaments_.end()) {
    throw Error(ErrorCode::IndexOutOfRange, "cell (" + std::to_string(cell.row) + "," +
                                                std::to_string(cell.col) + ") not in grid");
  }
  return it->second;
}

void ThermalGrid::register_cell(CellIndex cell, std::size_t probe,
                                std::vector<std::size_t> filament) {
  if (probe >= dims_.count()) throw Error(ErrorCode::IndexOutOfRange, "probe outside grid");
  if (filament.empty()) throw Error(ErrorCode::GeometryInconsistent, "empty filament region");
  probes_[cell] = probe;
  filaments_[cell] = std::move(filament);
}

void ThermalGrid::set_cell_shape(std::size_t rows, std::size_t cols) {
  cell_rows_ = rows;
  cell_cols_ = cols;
}

std::size_t voxel_count_for(double length_nm, double voxel_size_nm, const char* what) {
  const auto n = static_cast<long long>(std::llround(length_nm / voxel_size_nm));
  if (n < 1) {
    throw Error(ErrorCode::GeometryInconsistent,
                std::string(what) + " is thinner than half a voxel");
  }
  return static_cast<std::size_t>(n);
}

ThermalGrid build_grid(const CrossbarGeometry& geom, double voxel_size_nm,
                       std::size_t max_voxels) {
  if (!(voxel_size_nm > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be > 0");
  if (auto v = geom.violations(); !v.empty()) {
    std::string msg = "invalid geometry:";
    for (const auto& s : v) msg += " " + s + ";";
    throw Error(ErrorCode::GeometryInconsistent, msg);
  }

  const std::size_t w = voxel_count_for(geom.electrode_width, voxel_size_nm, "electrode_width");
  const std::size_t s = voxel_count_for(geom.electrode_spacing, voxel_size_nm, "electrode_spacing");
  const std::size_t margin =
      geom.lateral_margin > 0.0
          ? static_cast<std::size_t>(std::llround(geom.lateral_margin / voxel_size_nm))
          : 0;
  const std::size_t n_sub =
      voxel_count_for(geom.substrate_thickness, voxel_size_nm, "substrate_thickness");
  const std::size_t n_ins =
      voxel_count_for(geom.insulator_thickness, voxel_size_nm, "insulator_thickness");
  const std::size_t n_el =
      voxel_count_for(geom.electrode_thickness, voxel_size_nm, "electrode_thickness");
  const std::size_t n_ox = voxel_count_for(geom.oxide_thickness, voxel_size_nm, "oxide_thickness");

  VoxelDims dims;
  dims.nx = 2 * margin + geom.cols * w + (geom.cols - 1) * s;
  dims.ny = 2 * margin + geom.rows * w + (geom.rows - 1) * s;
  dims.nz = n_sub + n_ins + 2 * n_el + n_ox;
  // Overflow-safe budget check.
  if (dims.nx > max_voxels || dims.ny > max_voxels || dims.nz > max_voxels ||
      static_cast<double>(dims.nx) * static_cast<double>(dims.ny) * static_cast<double>(dims.nz) >
          static_cast<double>(max_voxels)) {
    throw Error(ErrorCode::GridTooLarge,
                std::to_string(dims.nx) + "x" + std::to_string(dims.ny) + "x" +
                    std::to_string(dims.nz) + " exceeds the budget of " +
                    std::to_string(max_voxels) + " voxels");
  }

  const std::size_t z_ins = n_sub;
  const std::size_t z_be = z_ins + n_ins;
  const std::size_t z_ox = z_be + n_el;
  const std::size_t z_te = z_ox + n_ox;

  // Electrode start positions along x (columns) and y (rows).
  auto line_start = [&](std::size_t k) { return margin + k * (w + s); };
  std::vector<std::uint8_t> in_column_line(dims.nx, 0), in_row_line(dims.ny, 0);
  for (std::size_t j = 0; j < geom.cols; ++j) {
    for (std::size_t x = line_start(j); x < line_start(j) + w; ++x) in_column_line[x] = 1;
  }
  for (std::size_t i = 0; i < geom.rows; ++i) {
    for (std::size_t y = line_start(i); y < line_start(i) + w; ++y) in_row_line[y] = 1;
  }

  const auto& mc = geom.material_conductivities;
  std::vector<double> kappa(dims.count());
  std::vector<std::uint8_t> mask(dims.count(), 0);
  for (std::size_t z = 0; z < dims.nz; ++z) {
    for (std::size_t y = 0; y < dims.ny; ++y) {
      for (std::size_t x = 0; x < dims.nx; ++x) {
        double k;
        if (z < z_ins) {
          k = mc.substrate;
        } else if (z < z_be) {
          k = mc.insulator;
        } else if (z < z_ox) {
          k = in_column_line[x] ? mc.electrode : mc.insulator;
        } else if (z < z_te) {
          k = mc.oxide;
        } else {
          k = in_row_line[y] ? mc.electrode : mc.insulator;
        }
        const std::size_t idx = x + dims.nx * (y + dims.ny * z);
        kappa[idx] = k;
        mask[idx] = z == 0 ? 1 : 0;
      }
    }
  }

  // Filament voxels: oxide voxels whose centres fall inside the filament
  // cylinder, centred on the crosspoint.
  const double radius = geom.filament_radius / voxel_size_nm;
  const double half_w = static_cast<double>(w) / 2.0;
  const std::size_t z_probe = z_ox + n_ox / 2;
  struct Pending {
    CellIndex cell;
    std::size_t probe;
    std::vector<std::size_t> voxels;
  };
  std::vector<Pending> cells;
  for (std::size_t i = 0; i < geom.rows; ++i) {
    for (std::size_t j = 0; j < geom.cols; ++j) {
      const double xc = static_cast<double>(line_start(j)) + half_w;
      const double yc = static_cast<double>(line_start(i)) + half_w;
      std::vector<std::size_t> voxels;
      for (std::size_t y = line_start(i); y < line_start(i) + w; ++y) {
        for (std::size_t x = line_start(j); x < line_start(j) + w; ++x) {
          const double dx = static_cast<double>(x) + 0.5 - xc;
          const double dy = static_cast<double>(y) + 0.5 - yc;
          if (dx * dx + dy * dy <= radius * radius + 1e-9) {
            for (std::size_t z = z_ox; z < z_te; ++z) voxels.push_back(x + dims.nx * (y + dims.ny * z));
          }
        }
      }
      const auto px = static_cast<std::size_t>(std::floor(xc));
      const auto py = static_cast<std::size_t>(std::floor(yc));
      const std::size_t probe = px + dims.nx * (py + dims.ny * z_probe);
      if (voxels.empty()) {
        for (std::size_t z = z_ox; z < z_te; ++z) voxels.push_back(px + dims.nx * (py + dims.ny * z));
      }
      for (auto v : voxels) kappa[v] = mc.filament;
      cells.push_back({{i, j}, probe, std::move(voxels)});
    }
  }

  ThermalGrid grid(dims, voxel_size_nm, std::move(kappa), std::move(mask));
  grid.set_cell_shape(geom.rows, geom.cols);
  for (auto& c : cells) grid.register_cell(c.cell, c.probe, std::move(c.voxels));
  return grid;
}

}  // namespace xhammer
