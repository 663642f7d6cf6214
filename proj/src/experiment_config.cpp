#include <cmath>
#include <fstream>
#include <set>

#include "xhammer/error.hpp"
#include "xhammer/experiment.hpp"

namespace xhammer {

using nlohmann::json;

PulseProgram ProgramSpec::to_program() const {
  PulseProgram p;
  p.aggressors = aggressors;
  p.victim = victim;
  p.v_set = v_set;
  p.pulse_length = pulse_length_ns * 1e-9;
  p.duty_cycle = duty_cycle;
  p.max_pulses = max_pulses;
  p.dt = dt_ns * 1e-9;
  return p;
}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PulseLength: return "pulse_length";
    case SweepVariable::Spacing: return "spacing";
    case SweepVariable::Ambient: return "ambient";
  }
  return "unknown";
}

namespace {

// Parsed text gives unsigned numbers; programmatically built JSON may hold
// signed ones.
bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

// Collects type and range problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> violations;

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    violations.push_back(path + ": expected an object");
    return false;
  }

  template <typename T>
  void get(const json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) {
        violations.push_back(path + key + ": expected a number");
        return;
      }
    } else if constexpr (std::is_same_v<T, std::size_t>) {
      if (!is_count(v)) {
        violations.push_back(path + key + ": expected a non-negative integer");
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) {
        violations.push_back(path + key + ": expected a string");
        return;
      }
    }
    out = v.get<T>();
  }

  void known_keys(const json& obj, std::initializer_list<const char*> known, const std::string& path) {
    for (const auto& [k, _] : obj.items()) {
      bool ok = false;
      for (const char* name : known) ok = ok || k == name;
      if (!ok) violations.push_back(path + k + ": unknown key");
    }
  }

  std::optional<CellIndex> cell(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !is_count(v[0]) || !is_count(v[1])) {
      violations.push_back(path + ": expected [row, col] with non-negative integers");
      return std::nullopt;
    }
    return CellIndex{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
  }

  void add(std::string prefix, const std::vector<std::string>& items) {
    for (const auto& s : items) violations.push_back(prefix + s);
  }
};

void read_geometry(Reader& r, const json& j, CrossbarGeometry& g) {
  const std::string p = "geometry.";
  if (!r.object(j, "geometry")) return;
  r.known_keys(j,
               {"rows", "cols", "electrode_spacing", "electrode_width", "electrode_thickness",
                "oxide_thickness", "substrate_thickness", "insulator_thickness", "lateral_margin",
                "filament_radius", "material_conductivities"},
               p);
  r.get(j, "rows", p, g.rows);
  r.get(j, "cols", p, g.cols);
  r.get(j, "electrode_spacing", p, g.electrode_spacing);
  r.get(j, "electrode_width", p, g.electrode_width);
  r.get(j, "electrode_thickness", p, g.electrode_thickness);
  r.get(j, "oxide_thickness", p, g.oxide_thickness);
  r.get(j, "substrate_thickness", p, g.substrate_thickness);
  r.get(j, "insulator_thickness", p, g.insulator_thickness);
  r.get(j, "lateral_margin", p, g.lateral_margin);
  r.get(j, "filament_radius", p, g.filament_radius);
  if (j.contains("material_conductivities")) {
    const auto& m = j.at("material_conductivities");
    const std::string mp = p + "material_conductivities.";
    if (r.object(m, p + "material_conductivities")) {
      r.known_keys(m, {"substrate", "insulator", "electrode", "oxide", "filament"}, mp);
      auto& mc = g.material_conductivities;
      r.get(m, "substrate", mp, mc.substrate);
      r.get(m, "insulator", mp, mc.insulator);
      r.get(m, "electrode", mp, mc.electrode);
      r.get(m, "oxide", mp, mc.oxide);
      r.get(m, "filament", mp, mc.filament);
    }
  }
}

void read_device(Reader& r, const json& j, DeviceParams& d) {
  const std::string p = "device.";
  if (!r.object(j, "device")) return;
  r.known_keys(j, {"g_lrs", "g_hrs", "k0", "e_a", "v0", "r_th_eff", "x_min", "x_max", "flip_threshold"}, p);
  r.get(j, "g_lrs", p, d.g_lrs);
  r.get(j, "g_hrs", p, d.g_hrs);
  r.get(j, "k0", p, d.k0);
  r.get(j, "e_a", p, d.e_a);
  r.get(j, "v0", p, d.v0);
  r.get(j, "r_th_eff", p, d.r_th_eff);
  r.get(j, "x_min", p, d.x_min);
  r.get(j, "x_max", p, d.x_max);
  r.get(j, "flip_threshold", p, d.flip_threshold);
}

ProgramSpec default_program(const CrossbarGeometry& g) {
  ProgramSpec p;
  const CellIndex centre{g.rows / 2, g.cols / 2};
  p.aggressors = {centre};
  if (g.cols > 1) {
    p.victim = {centre.row, centre.col + 1 < g.cols ? centre.col + 1 : centre.col - 1};
  } else if (g.rows > 1) {
    p.victim = {centre.row + 1 < g.rows ? centre.row + 1 : centre.row - 1, centre.col};
  }
  return p;
}

void read_program(Reader& r, const json& j, ProgramSpec& prog) {
  const std::string p = "program.";
  if (!r.object(j, "program")) return;
  r.known_keys(j, {"aggressors", "victim", "v_set", "pulse_length_ns", "duty_cycle", "max_pulses", "dt_ns"}, p);
  if (j.contains("aggressors")) {
    const auto& a = j.at("aggressors");
    if (!a.is_array()) {
      r.violations.push_back("program.aggressors: expected a list of [row, col]");
    } else {
      prog.aggressors.clear();
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (auto c = r.cell(a[k], "program.aggressors[" + std::to_string(k) + "]")) {
          prog.aggressors.push_back(*c);
        }
      }
    }
  }
  if (j.contains("victim")) {
    if (auto c = r.cell(j.at("victim"), "program.victim")) prog.victim = *c;
  }
  r.get(j, "v_set", p, prog.v_set);
  r.get(j, "pulse_length_ns", p, prog.pulse_length_ns);
  r.get(j, "duty_cycle", p, prog.duty_cycle);
  r.get(j, "max_pulses", p, prog.max_pulses);
  r.get(j, "dt_ns", p, prog.dt_ns);
}

std::optional<CellGrid<CellInit>> read_init(Reader& r, const json& j, const CrossbarGeometry& g,
                                            const DeviceParams& d) {
  const std::size_t rows = j.is_array() ? j.size() : 0;
  const std::size_t cols = rows > 0 && j[0].is_array() ? j[0].size() : 0;
  bool rectangular = j.is_array() && rows > 0;
  for (std::size_t i = 0; rectangular && i < rows; ++i) {
    rectangular = j[i].is_array() && j[i].size() == cols;
  }
  if (!rectangular) {
    r.violations.push_back("init_states: expected a rectangular list of rows");
    return std::nullopt;
  }
  if (rows != g.rows || cols != g.cols) {
    r.violations.push_back("init_states: grid is " + std::to_string(rows) + "x" +
                           std::to_string(cols) + " but the geometry is " +
                           std::to_string(g.rows) + "x" + std::to_string(g.cols));
    return std::nullopt;
  }
  CellGrid<CellInit> grid(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const auto& v = j[i][k];
      const std::string path = "init_states[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (v.is_string() && v.get<std::string>() == "LRS") {
        grid(i, k) = {CellInit::Kind::Lrs, 0.0};
      } else if (v.is_string() && v.get<std::string>() == "HRS") {
        grid(i, k) = {CellInit::Kind::Hrs, 0.0};
      } else if (v.is_number()) {
        const double x = v.get<double>();
        if (!(x >= d.x_min && x <= d.x_max)) r.violations.push_back(path + ": state outside [x_min, x_max]");
        grid(i, k) = {CellInit::Kind::Value, x};
      } else {
        r.violations.push_back(path + ": expected \"LRS\", \"HRS\" or a state value");
      }
    }
  }
  return grid;
}

void check_sweep(Reader& r, const SweepSpec& s, const ExperimentConfig& cfg) {
  if (s.values.empty()) r.violations.push_back("sweep.values: at least one value required");
  std::set<double> seen;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double v = s.values[k];
    const std::string path = "sweep.values[" + std::to_string(k) + "]";
    if (!seen.insert(v).second) r.violations.push_back(path + ": duplicate value");
    switch (s.variable) {
      case SweepVariable::PulseLength:
        if (!(v > 0.0 && v <= 1e6)) r.violations.push_back(path + ": pulse length must lie in (0, 1e6] ns");
        if (cfg.program.dt_ns > 0.0 && v < cfg.program.dt_ns) {
          r.violations.push_back(path + ": pulse length shorter than program.dt_ns");
        }
        break;
      case SweepVariable::Spacing:
        if (!(v >= 1.0 && v <= 1000.0)) r.violations.push_back(path + ": spacing must lie in [1, 1000] nm");
        break;
      case SweepVariable::Ambient:
        if (!(v >= 200.0 && v <= 1000.0)) r.violations.push_back(path + ": ambient must lie in [200, 1000] K");
        break;
    }
  }
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  Reader r;
  ExperimentConfig cfg;
  if (!r.object(j, "config")) throw ValidationError(r.violations);
  r.known_keys(j,
               {"geometry", "voxel_size_nm", "device", "ambient_K", "program", "init_states",
                "alpha_source", "wire_resistance_ohm", "sweep", "sweep_powers_uW", "solver_tol",
                "relax_tol_K"},
               "");
  if (!j.contains("geometry")) r.violations.push_back("geometry: required");
  else read_geometry(r, j.at("geometry"), cfg.geometry);
  r.get(j, "voxel_size_nm", "", cfg.voxel_size);
  if (j.contains("device")) read_device(r, j.at("device"), cfg.device);
  r.get(j, "ambient_K", "", cfg.ambient);
  cfg.program = default_program(cfg.geometry);
  if (j.contains("program")) read_program(r, j.at("program"), cfg.program);
  if (j.contains("init_states")) cfg.init_states = read_init(r, j.at("init_states"), cfg.geometry, cfg.device);
  r.get(j, "alpha_source", "", cfg.alpha_source);
  r.get(j, "wire_resistance_ohm", "", cfg.wire_resistance);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (r.object(s, "sweep")) {
      r.known_keys(s, {"variable", "values"}, "sweep.");
      SweepSpec spec;
      std::string var;
      r.get(s, "variable", "sweep.", var);
      if (var == "pulse_length") spec.variable = SweepVariable::PulseLength;
      else if (var == "spacing") spec.variable = SweepVariable::Spacing;
      else if (var == "ambient") spec.variable = SweepVariable::Ambient;
      else r.violations.push_back("sweep.variable: expected pulse_length, spacing or ambient");
      if (s.contains("values") && s.at("values").is_array()) {
        for (const auto& v : s.at("values")) {
          if (v.is_number()) spec.values.push_back(v.get<double>());
          else r.violations.push_back("sweep.values: expected numbers");
        }
      } else {
        r.violations.push_back("sweep.values: expected a list of numbers");
      }
      cfg.sweep = spec;
    }
  }
  if (j.contains("sweep_powers_uW")) {
    const auto& pw = j.at("sweep_powers_uW");
    if (pw.is_array()) {
      for (const auto& v : pw) {
        if (v.is_number()) cfg.sweep_powers_uw.push_back(v.get<double>());
        else r.violations.push_back("sweep_powers_uW: expected numbers");
      }
    } else {
      r.violations.push_back("sweep_powers_uW: expected a list of numbers");
    }
  }
  r.get(j, "solver_tol", "", cfg.solver_tol);
  r.get(j, "relax_tol_K", "", cfg.relax_tol);

  // Range checks on the assembled config.
  r.add("geometry.", cfg.geometry.violations());
  r.add("device.", cfg.device.violations());
  if (!(cfg.voxel_size > 0.0)) r.violations.push_back("voxel_size_nm: must be > 0");
  if (!(cfg.ambient >= 200.0 && cfg.ambient <= 1000.0)) r.violations.push_back("ambient_K: must lie in [200, 1000] K");
  if (!(cfg.wire_resistance >= 0.0)) r.violations.push_back("wire_resistance_ohm: must be >= 0");
  if (!(cfg.solver_tol > 0.0 && cfg.solver_tol <= 1e-4)) r.violations.push_back("solver_tol: must lie in (0, 1e-4]");
  if (!(cfg.relax_tol > 0.0)) r.violations.push_back("relax_tol_K: must be > 0");
  if (cfg.alpha_source.empty()) r.violations.push_back("alpha_source: must be \"compute\" or a path");
  if (!cfg.sweep_powers_uw.empty()) {
    std::set<double> distinct(cfg.sweep_powers_uw.begin(), cfg.sweep_powers_uw.end());
    if (distinct.size() < 4 || !distinct.contains(0.0) || *distinct.begin() < 0.0) {
      r.violations.push_back("sweep_powers_uW: need >= 4 distinct non-negative values including 0");
    }
  }
  if (cfg.geometry.rows * cfg.geometry.cols < 2) {
    r.violations.push_back("geometry: a hammering experiment needs at least two cells");
  } else {
    r.add("", cfg.program.to_program().violations(cfg.geometry.rows, cfg.geometry.cols));
  }
  if (cfg.sweep) check_sweep(r, *cfg.sweep, cfg);

  if (!r.violations.empty()) throw ValidationError(r.violations);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  ExperimentConfig cfg = experiment_from_json(j);
  if (cfg.alpha_source != "compute") {
    std::filesystem::path src(cfg.alpha_source);
    if (src.is_relative()) src = path.parent_path() / src;
    cfg.alpha_source = src.lexically_normal().string();
  }
  return cfg;
}

nlohmann::ordered_json experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& g = cfg.geometry;
  const auto& mc = g.material_conductivities;
  j["geometry"] = {
      {"rows", g.rows},
      {"cols", g.cols},
      {"electrode_spacing", g.electrode_spacing},
      {"electrode_width", g.electrode_width},
      {"electrode_thickness", g.electrode_thickness},
      {"oxide_thickness", g.oxide_thickness},
      {"substrate_thickness", g.substrate_thickness},
      {"insulator_thickness", g.insulator_thickness},
      {"lateral_margin", g.lateral_margin},
      {"filament_radius", g.filament_radius},
      {"material_conductivities",
       {{"substrate", mc.substrate},
        {"insulator", mc.insulator},
        {"electrode", mc.electrode},
        {"oxide", mc.oxide},
        {"filament", mc.filament}}},
  };
  j["voxel_size_nm"] = cfg.voxel_size;
  const auto& d = cfg.device;
  j["device"] = {{"g_lrs", d.g_lrs}, {"g_hrs", d.g_hrs}, {"k0", d.k0},
                 {"e_a", d.e_a},     {"v0", d.v0},       {"r_th_eff", d.r_th_eff},
                 {"x_min", d.x_min}, {"x_max", d.x_max}, {"flip_threshold", d.flip_threshold}};
  j["ambient_K"] = cfg.ambient;
  auto aggressors = nlohmann::ordered_json::array();
  for (const auto& a : cfg.program.aggressors) aggressors.push_back({a.row, a.col});
  j["program"] = {{"aggressors", aggressors},
                  {"victim", {cfg.program.victim.row, cfg.program.victim.col}},
                  {"v_set", cfg.program.v_set},
                  {"pulse_length_ns", cfg.program.pulse_length_ns},
                  {"duty_cycle", cfg.program.duty_cycle},
                  {"max_pulses", cfg.program.max_pulses},
                  {"dt_ns", cfg.program.dt_ns}};
  if (cfg.init_states) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cfg.init_states->rows(); ++i) {
      auto row = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < cfg.init_states->cols(); ++k) {
        const auto& c = (*cfg.init_states)(i, k);
        switch (c.kind) {
          case CellInit::Kind::Lrs: row.push_back("LRS"); break;
          case CellInit::Kind::Hrs: row.push_back("HRS"); break;
          case CellInit::Kind::Value: row.push_back(c.value); break;
        }
      }
      rows.push_back(std::move(row));
    }
    j["init_states"] = std::move(rows);
  }
  j["alpha_source"] = cfg.alpha_source;
  j["wire_resistance_ohm"] = cfg.wire_resistance;
  if (cfg.sweep) {
    j["sweep"] = {{"variable", std::string(to_string(cfg.sweep->variable))}, {"values", cfg.sweep->values}};
  }
  if (!cfg.sweep_powers_uw.empty()) j["sweep_powers_uW"] = cfg.sweep_powers_uw;
  j["solver_tol"] = cfg.solver_tol;
  j["relax_tol_K"] = cfg.relax_tol;
  return j;
}

CellGrid<double> initial_states(const ExperimentConfig& cfg) {
  const auto& d = cfg.device;
  CellGrid<double> x(cfg.geometry.rows, cfg.geometry.cols, d.x_min);
  if (cfg.init_states) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const auto& c = (*cfg.init_states)(i, k);
        x(i, k) = c.kind == CellInit::Kind::Lrs ? d.x_max : c.kind == CellInit::Kind::Hrs ? d.x_min : c.value;
      }
    }
  } else {
    for (const auto& a : cfg.program.aggressors) x[a] = d.x_max;
  }
  return x;
}

}  // namespace xhammer
