// Pulse-level driver of the hammering attack: bias the aggressor, settle the
// coupled electro-thermal state, advance switching kinetics, repeat until the
// victim flips.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xhammer/crossbar_circuit.hpp"
#include "xhammer/crosstalk_hub.hpp"

namespace xhammer {

struct PulseProgram {
  std::vector<CellIndex> aggressors;
  CellIndex victim;
  double v_set = 1.05;          // V
  double pulse_length = 50e-9;  // s, active part of one pulse
  double duty_cycle = 0.5;      // active fraction of the pulse period
  std::size_t max_pulses = 100'000;
  double dt = 0.0;  // s; 0 selects pulse_length/20 capped at 1 ns

  double step() const;
  double idle_time() const { return pulse_length * (1.0 - duty_cycle) / duty_cycle; }
  std::vector<std::string> violations(std::size_t rows, std::size_t cols) const;

  friend bool operator==(const PulseProgram&, const PulseProgram&) = default;
};

struct TraceSample {
  std::size_t pulse_index = 0;  // 1-based
  double victim_x = 0.0;
  double victim_t = 0.0;     // K, end of the active phase
  double aggressor_t = 0.0;  // K, end of the active phase
};

struct AttackResult {
  bool flipped = false;
  std::optional<std::size_t> pulses_to_flip;
  // Continuous flip position in pulses: the flip happened during pulse
  // floor(position) + 1, a fraction (position mod 1) into its active phase.
  std::optional<double> flip_position;
  CellGrid<DeviceState> final_states;
  std::vector<TraceSample> trace;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultRelaxTolerance = 0.01;  // K
inline constexpr std::size_t kMaxRelaxIterations = 100;

// Fixed point of T = T0 + r_th_eff * P + crosstalk(T), Jacobi iteration from
// the decoupled temperatures until the largest update is <= tol.
CellGrid<double> electrothermal_relax(const CrossbarInstance& xbar, const CellGrid<double>& cell_v,
                                      double tol = kDefaultRelaxTolerance);

bool detect_flip(const DeviceState& state, const DeviceParams& params);

// Records when a cell's state first reaches a threshold inside an interval.
struct ThresholdWatch {
  CellIndex cell;
  double threshold = 0.0;
  std::optional<double> crossing_time;  // s from interval start
};

class AttackEngine {
 public:
  explicit AttackEngine(CrossbarInstance xbar, double relax_tol = kDefaultRelaxTolerance);

  const CrossbarInstance& crossbar() const { return xbar_; }
  CellGrid<DeviceState>& states() { return xbar_.states; }

  // Holds `lines` for `duration`: ceil(duration/dt) steps of
  // {cell voltages, thermal relax, state update}, the last one truncated.
  void advance_interval(const LineVoltages& lines, double duration, double dt,
                        ThresholdWatch* watch = nullptr);

  AttackResult run_attack(const PulseProgram& program);
  // Always runs max_pulses and records one trace sample per pulse.
  AttackResult run_pulse_train(const PulseProgram& program, bool record_trace = true);

 private:
  AttackResult run(const PulseProgram& program, bool stop_on_flip, bool record_trace);
  void relax(const CellGrid<double>& cell_v, bool warm_start);

  CrossbarInstance xbar_;
  CrosstalkHub hub_;
  double relax_tol_;
  CellGrid<double> power_, temp_, next_, t_in_;
};

CrossbarInstance advance_interval(CrossbarInstance xbar, const LineVoltages& lines, double duration,
                                  double dt);

}  // namespace xhammer
