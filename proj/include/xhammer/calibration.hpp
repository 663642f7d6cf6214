// Fit of the switching kinetics to measured pulses-to-flip.
//
// Parameters are fitted in transformed space (ln k0, e_a, ln r_th_eff) by
// Levenberg-Marquardt on the log-ratio of simulated to measured pulse
// counts. The simulated count is the continuous flip position, which keeps
// the objective smooth in the parameters.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xhammer/experiment.hpp"

namespace xhammer {

enum class KineticParam { K0, Ea, RthEff };

std::string_view to_string(KineticParam p);

// One measured point. Unset conditions keep the base config's value.
struct ReferencePoint {
  std::optional<double> pulse_length_ns;
  std::optional<double> ambient;  // K
  double pulses = 0.0;
};

struct CalibrationSpec {
  std::vector<KineticParam> free = {KineticParam::K0};
  std::vector<ReferencePoint> points;
  // Stop when a step moves every transformed parameter by less than tol, or
  // improves the rms log residual by less than tol.
  double tol = 1e-3;
  std::size_t max_iterations = 60;
  // Simulations stop after this multiple of the measured count.
  double pulse_cap_factor = 30.0;
};

// {"free": ["k0", "e_a", "r_th_eff"], "points": [{"pulse_length_ns": 50, "pulses": 943}, ...]}
CalibrationSpec calibration_from_json(const nlohmann::json& j);
CalibrationSpec load_calibration(const std::filesystem::path& path);

struct CalibrationRow {
  ReferencePoint point;
  double predicted = 0.0;  // continuous pulses to flip, or an extrapolation
  bool flipped = false;
  std::optional<std::size_t> pulses_to_flip;
  double relative_error = 0.0;
};

struct CalibrationResult {
  DeviceParams device;
  std::vector<KineticParam> free;
  std::vector<CalibrationRow> rows;
  std::size_t iterations = 0;
  double rms_log_residual = 0.0;
};

// Reference config plus one point's conditions, with `device` substituted.
ExperimentConfig calibration_point_config(const ExperimentConfig& cfg, const ReferencePoint& point,
                                          const DeviceParams& device, double pulse_cap_factor);

// Predicted pulses for every point. Kernel re-labelled per point ambient.
std::vector<CalibrationRow> evaluate_points(const ExperimentConfig& cfg, const AlphaKernel& kernel,
                                            const DeviceParams& device,
                                            const std::vector<ReferencePoint>& points,
                                            double pulse_cap_factor, std::size_t threads = 1);

// Called after every accepted step with the iteration count, the sum of
// squared log residuals and the current parameters.
using CalibrationProgress = std::function<void(std::size_t, double, const DeviceParams&)>;

// Throws FitDiverged when the objective turns non-finite or the iteration
// budget runs out before the step tolerance is met.
CalibrationResult calibrate_kinetics(const ExperimentConfig& cfg, const CalibrationSpec& spec,
                                     KernelCache& cache, std::size_t threads = 1,
                                     const CalibrationProgress& progress = {});

nlohmann::ordered_json calibration_to_json(const CalibrationResult& result);

}  // namespace xhammer
