#include "xhammer/attack_engine.hpp"

#include <algorithm>
#include <cmath>

#include "xhammer/error.hpp"

namespace xhammer {

double PulseProgram::step() const {
  if (dt > 0.0) return dt;
  return std::min(pulse_length / 20.0, 1e-9);
}

std::vector<std::string> PulseProgram::violations(std::size_t rows, std::size_t cols) const {
  std::vector<std::string> out;
  auto in_range = [&](const CellIndex& c) { return c.row < rows && c.col < cols; };
  if (aggressors.empty()) out.push_back("program.aggressors: at least one aggressor required");
  for (std::size_t k = 0; k < aggressors.size(); ++k) {
    if (!in_range(aggressors[k])) {
      out.push_back("program.aggressors[" + std::to_string(k) + "]: outside the crossbar");
    }
    if (aggressors[k] == victim) out.push_back("program.victim: must not be an aggressor");
  }
  if (!in_range(victim)) out.push_back("program.victim: outside the crossbar");
  if (!(v_set >= 0.0 && v_set <= kMaxDeviceVoltage)) out.push_back("program.v_set: must lie in [0, 2] V");
  if (!(pulse_length > 0.0)) out.push_back("program.pulse_length: must be > 0");
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) out.push_back("program.duty_cycle: must lie in (0, 1]");
  if (max_pulses < 1) out.push_back("program.max_pulses: must be >= 1");
  if (dt < 0.0) out.push_back("program.dt: must be >= 0 (0 selects the default)");
  if (pulse_length > 0.0 && !(pulse_length >= step())) {
    out.push_back("program.dt: must not exceed the pulse length");
  }
  return out;
}

bool detect_flip(const DeviceState& state, const DeviceParams& params) {
  return state.x >= params.flip_threshold;
}

namespace {

// One Jacobi sweep per iteration; `temp` holds the initial guess on entry.
void relax_fixed_point(const CrosstalkHub& hub, const CrossbarInstance& xbar,
                       const CellGrid<double>& power, double tol, CellGrid<double>& temp,
                       CellGrid<double>& next, CellGrid<double>& t_in) {
  const double r_th = xbar.params.r_th_eff;
  const double t0 = xbar.ambient;
  double delta = 0.0;
  for (std::size_t it = 1; it <= kMaxRelaxIterations; ++it) {
    hub.apply(temp, t_in);
    delta = 0.0;
    auto tv = temp.values();
    auto nv = next.values();
    auto pv = power.values();
    auto iv = t_in.values();
    for (std::size_t k = 0; k < nv.size(); ++k) {
      nv[k] = t0 + r_th * pv[k] + iv[k];
      delta = std::max(delta, std::abs(nv[k] - tv[k]));
    }
    std::swap(temp, next);
    if (delta <= tol) return;
  }
  throw ConvergenceError("electro-thermal relaxation diverged; coupling sum " +
                             std::to_string(xbar.alpha_kernel.coupling_sum()) +
                             " is not a contraction",
                         delta, kMaxRelaxIterations);
}

void decoupled_temperatures(const CrossbarInstance& xbar, const CellGrid<double>& power,
                            CellGrid<double>& temp) {
  auto tv = temp.values();
  auto pv = power.values();
  for (std::size_t k = 0; k < tv.size(); ++k) tv[k] = xbar.ambient + xbar.params.r_th_eff * pv[k];
}

}  // namespace

CellGrid<double> electrothermal_relax(const CrossbarInstance& xbar, const CellGrid<double>& cell_v,
                                      double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "relax tolerance must be > 0");
  const CrosstalkHub hub(xbar.alpha_kernel, xbar.ambient);
  const CellGrid<double> power = cell_powers(cell_v, xbar);
  CellGrid<double> temp(xbar.rows(), xbar.cols()), next = temp, t_in = temp;
  decoupled_temperatures(xbar, power, temp);
  relax_fixed_point(hub, xbar, power, tol, temp, next, t_in);
  return temp;
}

AttackEngine::AttackEngine(CrossbarInstance xbar, double relax_tol)
    : xbar_(std::move(xbar)), hub_(xbar_.alpha_kernel, xbar_.ambient), relax_tol_(relax_tol) {
  xbar_.validate();
  if (!(relax_tol_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "relax tolerance must be > 0");
  power_ = CellGrid<double>(xbar_.rows(), xbar_.cols());
  temp_ = next_ = t_in_ = power_;
}

void AttackEngine::relax(const CellGrid<double>& cell_v, bool warm_start) {
  for (std::size_t i = 0; i < xbar_.rows(); ++i) {
    for (std::size_t j = 0; j < xbar_.cols(); ++j) {
      const double v = cell_v(i, j);
      power_(i, j) = v == 0.0 ? 0.0 : v * v * conductance(xbar_.states(i, j).x, xbar_.params);
    }
  }
  if (!warm_start) decoupled_temperatures(xbar_, power_, temp_);
  relax_fixed_point(hub_, xbar_, power_, relax_tol_, temp_, next_, t_in_);
}

void AttackEngine::advance_interval(const LineVoltages& lines, double duration, double dt,
                                    ThresholdWatch* watch) {
  if (!(duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be >= 0");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  if (lines.word_lines.size() != xbar_.rows() || lines.bit_lines.size() != xbar_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "line voltages do not match crossbar shape");
  }
  if (duration == 0.0) return;

  auto& states = xbar_.states;
  const bool wired = xbar_.wire_resistance_per_segment > 0.0;

  // Unbiased array: no power, no kinetics. Temperatures settle to ambient.
  if (lines.all_zero()) {
    relax(CellGrid<double>(xbar_.rows(), xbar_.cols()), false);
    for (std::size_t k = 0; k < states.size(); ++k) states.values()[k].t_fil = temp_.values()[k];
    return;
  }

  CellGrid<double> v = wired ? CellGrid<double>() : cell_voltages_ideal(lines);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double t_start = static_cast<double>(s) * dt;
    const double h = std::min(dt, duration - t_start);
    if (h <= 0.0) break;
    if (wired) v = solve_cell_voltages_wired(xbar_, lines);
    relax(v, s > 0);

    const double before = watch ? states[watch->cell].x : 0.0;
    auto sv = states.values();
    auto vv = v.values();
    auto tv = temp_.values();
    for (std::size_t k = 0; k < sv.size(); ++k) {
      sv[k].t_fil = tv[k];
      if (vv[k] != 0.0) sv[k].x = integrate_state(sv[k].x, vv[k], tv[k], h, xbar_.params);
    }
    if (watch && !watch->crossing_time) {
      const double after = states[watch->cell].x;
      if (before < watch->threshold && after >= watch->threshold) {
        watch->crossing_time = t_start + h * (watch->threshold - before) / (after - before);
      }
    }
  }
}

AttackResult AttackEngine::run_attack(const PulseProgram& program) {
  return run(program, true, false);
}

AttackResult AttackEngine::run_pulse_train(const PulseProgram& program, bool record_trace) {
  return run(program, false, record_trace);
}

AttackResult AttackEngine::run(const PulseProgram& program, bool stop_on_flip, bool record_trace) {
  const std::size_t m = xbar_.rows(), n = xbar_.cols();
  if (auto v = program.violations(m, n); !v.empty()) {
    std::string msg = "invalid pulse program:";
    for (const auto& s : v) msg += " " + s + ";";
    throw Error(ErrorCode::ConfigInvalid, msg);
  }

  AttackResult result;
  const CellIndex victim = program.victim;
  bool half_selected = false, coupled = false;
  for (const auto& a : program.aggressors) {
    half_selected = half_selected || a.row == victim.row || a.col == victim.col;
    const Offset d{static_cast<int>(victim.row) - static_cast<int>(a.row),
                   static_cast<int>(victim.col) - static_cast<int>(a.col)};
    coupled = coupled || xbar_.alpha_kernel.at(d) > 0.0;
  }
  if (!half_selected && !coupled) {
    throw Error(ErrorCode::ConfigInvalid,
                "victim is neither half-selected nor thermally coupled to any aggressor");
  }
  if (!half_selected) {
    result.warnings.push_back("victim shares no line with an aggressor and receives no V/2 stress");
  }

  const bool together = simultaneously_selectable(program.aggressors);
  if (!together && program.aggressors.size() > 1) {
    result.warnings.push_back("aggressors cannot be selected together; hammering round-robin");
  }
  const double dt = program.step();
  const double idle = program.idle_time();
  const LineVoltages zero = LineVoltages::zeros(m, n);
  if (record_trace) result.trace.reserve(program.max_pulses);

  for (std::size_t k = 1; k <= program.max_pulses; ++k) {
    const CellIndex* first = &program.aggressors[(k - 1) % program.aggressors.size()];
    const std::span<const CellIndex> targets =
        together ? std::span<const CellIndex>(program.aggressors) : std::span(first, 1);
    const LineVoltages lines = bias_lines(targets, program.v_set, m, n);

    ThresholdWatch watch{victim, xbar_.params.flip_threshold, std::nullopt};
    advance_interval(lines, program.pulse_length, dt, result.flipped ? nullptr : &watch);
    if (record_trace) {
      result.trace.push_back({k, xbar_.states[victim].x, xbar_.states[victim].t_fil,
                              xbar_.states[targets.front()].t_fil});
    }
    if (idle > 0.0) advance_interval(zero, idle, dt);

    if (!result.flipped && detect_flip(xbar_.states[victim], xbar_.params)) {
      result.flipped = true;
      result.pulses_to_flip = k;
      const double frac = watch.crossing_time ? *watch.crossing_time / program.pulse_length : 0.0;
      result.flip_position = static_cast<double>(k - 1) + frac;
      if (stop_on_flip) break;
    }
  }
  result.final_states = xbar_.states;
  return result;
}

CrossbarInstance advance_interval(CrossbarInstance xbar, const LineVoltages& lines, double duration,
                                  double dt) {
  AttackEngine engine(std::move(xbar));
  engine.advance_interval(lines, duration, dt);
  return engine.crossbar();
}

}  // namespace xhammer
