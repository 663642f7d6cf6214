#include "xhammer/experiment.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "xhammer/alpha_extraction.hpp"
#include "xhammer/error.hpp"
#include "xhammer/parallel.hpp"

namespace xhammer {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string KernelRequest::cache_key() const {
  ExperimentConfig probe;
  probe.geometry = geometry;
  nlohmann::ordered_json j;
  j["geometry"] = experiment_to_json(probe)["geometry"];
  j["voxel_size_nm"] = voxel_size;
  j["powers_W"] = powers;
  j["ambient_K"] = ambient;
  j["solver_tol"] = solver_tol;
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(j.dump());
  return out.str();
}

KernelRequest kernel_request(const ExperimentConfig& cfg) {
  KernelRequest req;
  req.geometry = cfg.geometry;
  req.voxel_size = cfg.voxel_size;
  if (cfg.sweep_powers_uw.empty()) {
    req.powers = default_sweep_powers();
  } else {
    for (double p : cfg.sweep_powers_uw) req.powers.push_back(p * 1e-6);
  }
  req.ambient = cfg.ambient;
  req.solver_tol = cfg.solver_tol;
  return req;
}

KernelReport compute_kernel(const KernelRequest& request, std::size_t threads) {
  const ThermalGrid grid = build_grid(request.geometry, request.voxel_size);
  const CellIndex source{request.geometry.rows / 2, request.geometry.cols / 2};
  HeatSolverOptions opts;
  opts.tol = request.solver_tol;
  const PowerSweepSamples samples = sweep_power(grid, source, request.powers, request.ambient, opts, threads);
  const ThermalResistanceFit rth = fit_thermal_resistance(samples);

  KernelReport report;
  report.kernel = extract_alpha_kernel(samples, rth.r_th);
  report.fit_r_squared = rth.r_squared;
  if (report.kernel.alpha.size() == 1) {
    report.warnings.push_back("kernel holds only the self term; no thermal coupling between cells");
  }
  if (report.kernel.coupling_sum() >= 1.0) {
    report.warnings.push_back("coupling sum " + std::to_string(report.kernel.coupling_sum()) +
                              " >= 1; electro-thermal relaxation will not contract");
  }
  return report;
}

KernelCache::KernelCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

KernelCache KernelCache::from_environment() {
  if (const char* env = std::getenv("XHAMMER_CACHE_DIR"); env && *env) {
    return KernelCache(std::filesystem::path(env));
  }
  return KernelCache();
}

AlphaKernel KernelCache::get(const KernelRequest& request, std::size_t threads) {
  const std::string key = request.cache_key();
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;

  std::optional<std::filesystem::path> file;
  if (dir_) {
    file = *dir_ / ("kernel-" + key + ".json");
    std::error_code ec;
    if (std::filesystem::exists(*file, ec)) {
      AlphaKernel k = load_kernel(*file);
      memory_.emplace(key, k);
      return k;
    }
  }
  AlphaKernel k = compute_kernel(request, threads).kernel;
  ++computed_;
  if (file) {
    std::filesystem::create_directories(*dir_);
    save_kernel(k, *file);
  }
  memory_.emplace(key, k);
  return k;
}

AlphaKernel resolve_kernel(const ExperimentConfig& cfg, KernelCache& cache, std::size_t threads) {
  AlphaKernel k = cfg.alpha_source == "compute" ? cache.get(kernel_request(cfg), threads)
                                                : load_kernel(cfg.alpha_source);
  return k.with_ambient(cfg.ambient);
}

CrossbarInstance make_crossbar(const ExperimentConfig& cfg, const AlphaKernel& kernel) {
  CrossbarInstance xbar = CrossbarInstance::make(cfg.geometry.rows, cfg.geometry.cols, cfg.device,
                                                 kernel, cfg.ambient, cfg.device.x_min);
  const CellGrid<double> x = initial_states(cfg);
  for (std::size_t k = 0; k < x.size(); ++k) xbar.states.values()[k].x = x.values()[k];
  xbar.wire_resistance_per_segment = cfg.wire_resistance;
  return xbar;
}

AttackResult simulate(const ExperimentConfig& cfg, const AlphaKernel& kernel, bool trace) {
  AttackEngine engine(make_crossbar(cfg, kernel), cfg.relax_tol);
  const PulseProgram program = cfg.program.to_program();
  return trace ? engine.run_pulse_train(program, true) : engine.run_attack(program);
}

nlohmann::ordered_json attack_result_to_json(const AttackResult& result) {
  nlohmann::ordered_json j;
  j["flipped"] = result.flipped;
  j["pulses_to_flip"] = result.pulses_to_flip ? nlohmann::ordered_json(*result.pulses_to_flip) : nullptr;
  j["flip_position"] = result.flip_position ? nlohmann::ordered_json(*result.flip_position) : nullptr;
  auto xs = nlohmann::ordered_json::array();
  auto ts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.final_states.rows(); ++i) {
    auto xr = nlohmann::ordered_json::array();
    auto tr = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < result.final_states.cols(); ++k) {
      xr.push_back(result.final_states(i, k).x);
      tr.push_back(result.final_states(i, k).t_fil);
    }
    xs.push_back(std::move(xr));
    ts.push_back(std::move(tr));
  }
  j["final_states"] = {{"x", std::move(xs)}, {"t_fil_K", std::move(ts)}};
  j["warnings"] = result.warnings;
  return j;
}

std::string trace_to_csv(const std::vector<TraceSample>& trace) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "pulse_index,victim_x,victim_T_K,aggressor_T_K\n";
  for (const auto& s : trace) {
    out << s.pulse_index << ',' << s.victim_x << ',' << s.victim_t << ',' << s.aggressor_t << '\n';
  }
  return out.str();
}

ExperimentConfig with_swept_value(const ExperimentConfig& cfg, SweepVariable variable, double value) {
  ExperimentConfig c = cfg;
  switch (variable) {
    case SweepVariable::PulseLength: c.program.pulse_length_ns = value; break;
    case SweepVariable::Spacing: c.geometry.electrode_spacing = value; break;
    case SweepVariable::Ambient: c.ambient = value; break;
  }
  c.sweep.reset();
  return c;
}

SweepResult run_sweep(const ExperimentConfig& cfg, KernelCache& cache, std::size_t threads) {
  if (!cfg.sweep) throw Error(ErrorCode::ConfigInvalid, "config has no sweep block");
  SweepResult result;
  result.variable = cfg.sweep->variable;
  std::vector<double> values = cfg.sweep->values;
  std::sort(values.begin(), values.end());

  // Kernels first: one extraction per geometry, shared by everything else.
  // Ambient only relabels the kernel; the conduction problem is linear.
  std::vector<ExperimentConfig> points;
  std::vector<AlphaKernel> kernels;
  for (double v : values) {
    ExperimentConfig point = with_swept_value(cfg, result.variable, v);
    ExperimentConfig kernel_cfg = result.variable == SweepVariable::Spacing ? point : cfg;
    kernels.push_back(resolve_kernel(kernel_cfg, cache, threads).with_ambient(point.ambient));
    points.push_back(std::move(point));
  }

  result.rows.resize(values.size());
  parallel_for(values.size(), threads, [&](std::size_t k) {
    const AttackResult r = simulate(points[k], kernels[k]);
    result.rows[k] = {values[k], r.pulses_to_flip, r.flipped};
  });
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "swept_value,pulses_to_flip,flipped\n";
  for (const auto& row : result.rows) {
    out << row.value << ',';
    if (row.pulses_to_flip) out << *row.pulses_to_flip;
    out << ',' << (row.flipped ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace xhammer
