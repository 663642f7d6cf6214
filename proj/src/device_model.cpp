#include "xhammer/device_model.hpp"

#include <algorithm>
#include <cmath>

#include "xhammer/common.hpp"
#include "xhammer/error.hpp"

namespace xhammer {

std::vector<std::string> DeviceParams::violations() const {
  std::vector<std::string> out;
  if (!(g_hrs > 0.0)) out.push_back("g_hrs: must be > 0");
  if (!(g_lrs > g_hrs)) out.push_back("g_lrs: must exceed g_hrs");
  if (!(k0 > 0.0) || !std::isfinite(k0)) out.push_back("k0: must be > 0");
  if (!(e_a > 0.0)) out.push_back("e_a: must be > 0");
  if (!(v0 > 0.0)) out.push_back("v0: must be > 0");
  if (!(r_th_eff > 0.0)) out.push_back("r_th_eff: must be > 0");
  if (!(x_min < flip_threshold && flip_threshold < x_max)) {
    out.push_back("flip_threshold: must lie strictly between x_min and x_max");
  }
  return out;
}

double conductance(double x, const DeviceParams& p) {
  const double s = (std::clamp(x, p.x_min, p.x_max) - p.x_min) / (p.x_max - p.x_min);
  return p.g_hrs + s * (p.g_lrs - p.g_hrs);
}

double device_current(double v, double x, const DeviceParams& p) {
  if (!(std::abs(v) <= kMaxDeviceVoltage)) {
    throw Error(ErrorCode::VoltageOutOfRange,
                std::to_string(v) + " V exceeds the model range of +/-2 V");
  }
  return conductance(x, p) * v;
}

double filament_temperature(double p_d, double t_in, double ambient, const DeviceParams& p) {
  return ambient + p.r_th_eff * p_d + t_in;
}

double state_rate(double v, double t, double x, const DeviceParams& p) {
  if (!(t >= kMinKineticsTemperature)) {
    throw Error(ErrorCode::TemperatureOutOfRange,
                std::to_string(t) + " K is below the kinetics validity bound of 200 K");
  }
  if (v == 0.0) return 0.0;
  if (v > 0.0 && x >= p.x_max) return 0.0;
  if (v < 0.0 && x <= p.x_min) return 0.0;
  return p.k0 * std::exp(-p.e_a / (kBoltzmannEv * t)) * std::sinh(v / p.v0);
}

double integrate_state(double x, double v, double t, double dt, const DeviceParams& p) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  const double max_step = 0.01 * (p.x_max - p.x_min);
  double remaining = dt;
  while (remaining > 0.0) {
    const double rate = state_rate(v, t, x, p);
    if (rate == 0.0) break;
    const double h = std::min(remaining, max_step / std::abs(rate));
    x = std::clamp(x + h * rate, p.x_min, p.x_max);
    remaining -= h;
  }
  return x;
}

}  // namespace xhammer
