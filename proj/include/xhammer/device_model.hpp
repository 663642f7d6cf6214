// Compact model of a filamentary VCM cell.
//
// Conductance interpolates linearly between HRS and LRS with the normalized
// filament state x. The filament temperature follows the dissipated power
// instantly through an effective thermal resistance, plus whatever the
// neighbours contribute. The state moves with Arrhenius-activated,
// sinh-field-accelerated kinetics.
#pragma once

#include <string>
#include <vector>

namespace xhammer {

struct DeviceParams {
  double g_lrs = 1e-4;        // S
  double g_hrs = 1e-6;        // S
  double k0 = 1.4113e12;      // 1/s, see calibrate_kinetics
  double e_a = 0.6;           // eV
  double v0 = 0.25;           // V
  double r_th_eff = 5e6;      // K/W
  double x_min = 0.0;
  double x_max = 1.0;
  double flip_threshold = 0.5;

  std::vector<std::string> violations() const;

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

struct DeviceState {
  double x = 0.0;        // normalized filament state, x_max is LRS
  double t_fil = 300.0;  // K

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

inline constexpr double kMaxDeviceVoltage = 2.0;  // V
inline constexpr double kMinKineticsTemperature = 200.0;  // K

double conductance(double x, const DeviceParams& p);

// Ohmic current; throws VoltageOutOfRange beyond +/-2 V.
double device_current(double v, double x, const DeviceParams& p);

// ambient + r_th_eff * p_d + t_in.
double filament_temperature(double p_d, double t_in, double ambient, const DeviceParams& p);

// dx/dt in 1/s. Positive voltage drives towards x_max; the rate vanishes once
// the state sits on the bound it is pushed against.
double state_rate(double v, double t, double x, const DeviceParams& p);

// Explicit update over dt at fixed (v, t), sub-stepped so that no sub-step
// moves x by more than 1% of the state range. Result is clamped to bounds.
double integrate_state(double x, double v, double t, double dt, const DeviceParams& p);

}  // namespace xhammer
