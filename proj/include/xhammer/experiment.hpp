// Experiment configuration, kernel provisioning and the sweep / calibration
// drivers behind the command-line tool.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xhammer/alpha_kernel.hpp"
#include "xhammer/attack_engine.hpp"
#include "xhammer/device_model.hpp"
#include "xhammer/thermal_grid.hpp"

namespace xhammer {

// Initial state of one cell: LRS, HRS or an explicit normalized state.
struct CellInit {
  enum class Kind { Lrs, Hrs, Value };
  Kind kind = Kind::Hrs;
  double value = 0.0;

  friend bool operator==(const CellInit&, const CellInit&) = default;
};

enum class SweepVariable { PulseLength, Spacing, Ambient };

struct SweepSpec {
  SweepVariable variable = SweepVariable::PulseLength;
  // ns for pulse_length, nm for spacing, K for ambient.
  std::vector<double> values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

// Pulse program as written in the config, times in ns.
struct ProgramSpec {
  std::vector<CellIndex> aggressors;
  CellIndex victim;
  double v_set = 1.05;
  double pulse_length_ns = 50.0;
  double duty_cycle = 0.5;
  std::size_t max_pulses = 100'000;
  double dt_ns = 0.0;  // 0 selects the default step

  PulseProgram to_program() const;

  friend bool operator==(const ProgramSpec&, const ProgramSpec&) = default;
};

struct ExperimentConfig {
  CrossbarGeometry geometry;
  double voxel_size = 5.0;  // nm
  DeviceParams device;
  double ambient = 300.0;  // K
  ProgramSpec program;
  // Absent: aggressors LRS, everything else HRS.
  std::optional<CellGrid<CellInit>> init_states;
  std::string alpha_source = "compute";  // "compute" or a kernel artifact path
  double wire_resistance = 0.0;           // ohm per line segment
  std::optional<SweepSpec> sweep;
  std::vector<double> sweep_powers_uw;  // empty selects the default power sweep
  double solver_tol = 1e-9;
  double relax_tol = kDefaultRelaxTolerance;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses and validates; every violation is reported with its field path.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::ordered_json experiment_to_json(const ExperimentConfig& cfg);

// Resolved per-cell initial states.
CellGrid<double> initial_states(const ExperimentConfig& cfg);

// Parameters that determine an extracted kernel.
struct KernelRequest {
  CrossbarGeometry geometry;
  double voxel_size = 5.0;
  std::vector<double> powers;
  double ambient = 300.0;
  double solver_tol = 1e-9;

  std::string cache_key() const;
};

KernelRequest kernel_request(const ExperimentConfig& cfg);

struct KernelReport {
  AlphaKernel kernel;
  double fit_r_squared = 0.0;
  std::vector<std::string> warnings;
};

// Grid build, power sweep around the central cell, and the two regressions.
KernelReport compute_kernel(const KernelRequest& request, std::size_t threads = 1);

// Memoizes extracted kernels in memory and, when a directory is given, on
// disk as kernel-<hash>.json. Kernels are stored at their request ambient.
class KernelCache {
 public:
  explicit KernelCache(std::optional<std::filesystem::path> dir = std::nullopt);
  // Directory from XHAMMER_CACHE_DIR, if set.
  static KernelCache from_environment();

  AlphaKernel get(const KernelRequest& request, std::size_t threads = 1);
  std::size_t computed() const { return computed_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, AlphaKernel> memory_;
  std::mutex mutex_;
  std::size_t computed_ = 0;
};

// Kernel named by cfg.alpha_source, re-labelled to cfg.ambient.
AlphaKernel resolve_kernel(const ExperimentConfig& cfg, KernelCache& cache, std::size_t threads = 1);

CrossbarInstance make_crossbar(const ExperimentConfig& cfg, const AlphaKernel& kernel);

AttackResult simulate(const ExperimentConfig& cfg, const AlphaKernel& kernel, bool trace = false);

nlohmann::ordered_json attack_result_to_json(const AttackResult& result);
// Columns: pulse_index,victim_x,victim_T_K,aggressor_T_K
std::string trace_to_csv(const std::vector<TraceSample>& trace);

struct SweepRow {
  double value = 0.0;
  std::optional<std::size_t> pulses_to_flip;
  bool flipped = false;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::PulseLength;
  std::vector<SweepRow> rows;  // ascending by swept value
};

// Config with one sweep variable set to `value` (in the sweep's units).
ExperimentConfig with_swept_value(const ExperimentConfig& cfg, SweepVariable variable, double value);

SweepResult run_sweep(const ExperimentConfig& cfg, KernelCache& cache, std::size_t threads = 1);

// Columns: swept_value,pulses_to_flip,flipped
std::string sweep_to_csv(const SweepResult& result);

std::string_view to_string(SweepVariable v);

}  // namespace xhammer
