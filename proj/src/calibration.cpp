#include "xhammer/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "xhammer/error.hpp"
#include "xhammer/parallel.hpp"

namespace xhammer {

std::string_view to_string(KineticParam p) {
  switch (p) {
    case KineticParam::K0: return "k0";
    case KineticParam::Ea: return "e_a";
    case KineticParam::RthEff: return "r_th_eff";
  }
  return "?";
}

CalibrationSpec calibration_from_json(const nlohmann::json& j) {
  std::vector<std::string> bad;
  CalibrationSpec spec;
  if (!j.is_object()) throw ValidationError({"reference: expected an object"});
  for (const auto& [key, _] : j.items()) {
    if (key != "free" && key != "points" && key != "tol" && key != "max_iterations" &&
        key != "pulse_cap_factor") {
      bad.push_back(key + ": unknown key");
    }
  }
  if (j.contains("free")) {
    spec.free.clear();
    if (!j["free"].is_array() || j["free"].empty()) {
      bad.push_back("free: expected a non-empty list of parameter names");
    } else {
      for (const auto& f : j["free"]) {
        const std::string name = f.is_string() ? f.get<std::string>() : "";
        KineticParam p;
        if (name == "k0") p = KineticParam::K0;
        else if (name == "e_a") p = KineticParam::Ea;
        else if (name == "r_th_eff") p = KineticParam::RthEff;
        else {
          bad.push_back("free: unknown parameter " + f.dump());
          continue;
        }
        if (std::find(spec.free.begin(), spec.free.end(), p) != spec.free.end()) {
          bad.push_back("free: duplicate parameter " + name);
        } else {
          spec.free.push_back(p);
        }
      }
    }
  }
  if (!j.contains("points") || !j["points"].is_array() || j["points"].empty()) {
    bad.push_back("points: expected a non-empty list");
  } else {
    for (std::size_t k = 0; k < j["points"].size(); ++k) {
      const auto& p = j["points"][k];
      const std::string path = "points[" + std::to_string(k) + "]";
      if (!p.is_object()) {
        bad.push_back(path + ": expected an object");
        continue;
      }
      ReferencePoint rp;
      for (const auto& [key, v] : p.items()) {
        if (!v.is_number()) {
          bad.push_back(path + "." + key + ": expected a number");
          continue;
        }
        const double x = v.get<double>();
        if (key == "pulse_length_ns") {
          if (!(x > 0.0)) bad.push_back(path + ".pulse_length_ns: must be > 0");
          rp.pulse_length_ns = x;
        } else if (key == "ambient_K") {
          if (!(x >= 200.0 && x <= 1000.0)) bad.push_back(path + ".ambient_K: must lie in [200, 1000] K");
          rp.ambient = x;
        } else if (key == "pulses") {
          if (!(x >= 1.0)) bad.push_back(path + ".pulses: must be >= 1");
          rp.pulses = x;
        } else {
          bad.push_back(path + "." + key + ": unknown key");
        }
      }
      if (!p.contains("pulses")) bad.push_back(path + ".pulses: required");
      spec.points.push_back(rp);
    }
  }
  auto number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (j[key].is_number()) out = j[key].get<double>();
    else bad.push_back(std::string(key) + ": expected a number");
  };
  double iters = static_cast<double>(spec.max_iterations);
  number("tol", spec.tol);
  number("max_iterations", iters);
  number("pulse_cap_factor", spec.pulse_cap_factor);
  if (!(spec.tol > 0.0)) bad.push_back("tol: must be > 0");
  if (!(iters >= 1.0)) bad.push_back("max_iterations: must be >= 1");
  if (!(spec.pulse_cap_factor >= 2.0)) bad.push_back("pulse_cap_factor: must be >= 2");
  spec.max_iterations = static_cast<std::size_t>(std::max(iters, 1.0));
  if (spec.free.size() > spec.points.size() && !spec.points.empty()) {
    bad.push_back("free: more free parameters than reference points");
  }
  if (!bad.empty()) throw ValidationError(bad);
  return spec;
}

CalibrationSpec load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return calibration_from_json(j);
}

ExperimentConfig calibration_point_config(const ExperimentConfig& cfg, const ReferencePoint& point,
                                          const DeviceParams& device, double pulse_cap_factor) {
  ExperimentConfig c = cfg;
  c.sweep.reset();
  if (point.pulse_length_ns) c = with_swept_value(c, SweepVariable::PulseLength, *point.pulse_length_ns);
  if (point.ambient) c = with_swept_value(c, SweepVariable::Ambient, *point.ambient);
  c.device = device;
  c.program.max_pulses = static_cast<std::size_t>(std::ceil(point.pulses * pulse_cap_factor));
  return c;
}

namespace {

CalibrationRow evaluate_one(const ExperimentConfig& cfg, const AlphaKernel& kernel,
                            const ReferencePoint& point) {
  const AttackResult r = simulate(cfg, kernel.with_ambient(cfg.ambient));
  CalibrationRow row;
  row.point = point;
  row.flipped = r.flipped;
  row.pulses_to_flip = r.pulses_to_flip;
  if (r.flipped) {
    row.predicted = *r.flip_position + 0.5;
  } else {
    // Linear extrapolation of the victim's progress towards the threshold.
    const CellIndex v = cfg.program.victim;
    const double x0 = initial_states(cfg)[v];
    const double x1 = r.final_states[v].x;
    const double n = static_cast<double>(cfg.program.max_pulses);
    const double progress = (x1 - x0) / (cfg.device.flip_threshold - x0);
    row.predicted = progress > 0.0 ? n / progress : std::numeric_limits<double>::infinity();
    row.predicted = std::min(row.predicted, 1e15);
  }
  row.relative_error = row.predicted / point.pulses - 1.0;
  return row;
}

// ln k0 and e_a are nearly collinear in their effect on the count. With both
// free, k0 enters as the log rate prefactor at kPivotTemperature, which
// removes most of that correlation from the normal equations.
constexpr double kPivotTemperature = 400.0;  // K

struct Transform {
  std::vector<KineticParam> free;
  DeviceParams base;

  bool pivot() const {
    return std::find(free.begin(), free.end(), KineticParam::K0) != free.end() &&
           std::find(free.begin(), free.end(), KineticParam::Ea) != free.end();
  }

  Eigen::VectorXd to_vector(const DeviceParams& d) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(free.size()));
    const double shift = pivot() ? d.e_a / (kBoltzmannEv * kPivotTemperature) : 0.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      switch (free[k]) {
        case KineticParam::K0: v[i] = std::log(d.k0) - shift; break;
        case KineticParam::Ea: v[i] = d.e_a; break;
        case KineticParam::RthEff: v[i] = std::log(d.r_th_eff); break;
      }
    }
    return v;
  }

  DeviceParams from_vector(const Eigen::VectorXd& v) const {
    DeviceParams d = base;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      if (free[k] == KineticParam::Ea) d.e_a = v[i];
      if (free[k] == KineticParam::RthEff) d.r_th_eff = std::exp(v[i]);
    }
    const double shift = pivot() ? d.e_a / (kBoltzmannEv * kPivotTemperature) : 0.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (free[k] == KineticParam::K0) d.k0 = std::exp(v[static_cast<Eigen::Index>(k)] + shift);
    }
    return d;
  }

  static double step(KineticParam p) { return p == KineticParam::Ea ? 2e-3 : 1e-2; }
};

}  // namespace

std::vector<CalibrationRow> evaluate_points(const ExperimentConfig& cfg, const AlphaKernel& kernel,
                                            const DeviceParams& device,
                                            const std::vector<ReferencePoint>& points,
                                            double pulse_cap_factor, std::size_t threads) {
  std::vector<CalibrationRow> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t k) {
    rows[k] = evaluate_one(calibration_point_config(cfg, points[k], device, pulse_cap_factor), kernel,
                           points[k]);
  });
  return rows;
}

CalibrationResult calibrate_kinetics(const ExperimentConfig& cfg, const CalibrationSpec& spec,
                                     KernelCache& cache, std::size_t threads,
                                     const CalibrationProgress& progress) {
  if (spec.points.empty()) throw Error(ErrorCode::InvalidArgument, "no reference points");
  if (spec.free.empty()) throw Error(ErrorCode::InvalidArgument, "no free parameters");
  const AlphaKernel kernel = resolve_kernel(cfg, cache, threads);
  const auto m = static_cast<Eigen::Index>(spec.points.size());

  auto residuals = [&](const DeviceParams& d, std::vector<CalibrationRow>* rows_out) -> Eigen::VectorXd {
    if (!d.violations().empty()) return Eigen::VectorXd::Constant(m, std::nan(""));
    auto rows = evaluate_points(cfg, kernel, d, spec.points, spec.pulse_cap_factor, threads);
    Eigen::VectorXd r(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      r[k] = std::log(rows[static_cast<std::size_t>(k)].predicted) -
             std::log(spec.points[static_cast<std::size_t>(k)].pulses);
    }
    if (rows_out) *rows_out = std::move(rows);
    return r;
  };
  auto finite = [](const Eigen::VectorXd& r) { return r.allFinite(); };

  Transform tf{spec.free, cfg.device};
  DeviceParams current = cfg.device;
  std::size_t iterations = 0;

  // The count scales nearly as 1/k0, so a few Newton steps on the mean
  // log-residual place k0 before the joint fit starts.
  const bool k0_free = std::find(spec.free.begin(), spec.free.end(), KineticParam::K0) != spec.free.end();
  Eigen::VectorXd r = residuals(current, nullptr);
  if (!finite(r)) throw Error(ErrorCode::FitDiverged, "initial parameters give a non-finite objective");
  if (k0_free) {
    for (int k = 0; k < 8 && std::abs(r.mean()) > 0.1 * spec.tol; ++k) {
      current.k0 *= std::exp(r.mean());
      r = residuals(current, nullptr);
      ++iterations;
      if (!finite(r)) throw Error(ErrorCode::FitDiverged, "k0 prefit left the valid range");
    }
    if (progress) progress(iterations, r.squaredNorm(), current);
  }

  Eigen::VectorXd p = tf.to_vector(current);
  const auto n = p.size();
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  for (std::size_t it = 0; it < spec.max_iterations && !converged; ++it) {
    ++iterations;
    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::VectorXd q = p;
      const double h = Transform::step(spec.free[static_cast<std::size_t>(c)]);
      q[c] += h;
      const Eigen::VectorXd rq = residuals(tf.from_vector(q), nullptr);
      if (!finite(rq)) throw Error(ErrorCode::FitDiverged, "non-finite objective in Jacobian");
      jac.col(c) = (rq - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;

    // Stop once even the undamped step promises no meaningful reduction.
    const Eigen::VectorXd gn = -jtj.ldlt().solve(g);
    if (gn.allFinite() && -g.dot(gn) - 0.5 * gn.dot(jtj * gn) <= 1e-4 * cost) {
      converged = true;
      break;
    }

    // Damped Gauss-Newton step plus a geodesic-acceleration correction; the
    // correction follows the curvature of the narrow e_a / r_th_eff valley.
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const auto solver = a.ldlt();
      const Eigen::VectorXd velocity = -solver.solve(g);
      if (!velocity.allFinite()) throw Error(ErrorCode::FitDiverged, "singular normal equations");

      constexpr double kProbe = 0.1;
      const Eigen::VectorXd rp = residuals(tf.from_vector(p + kProbe * velocity), nullptr);
      Eigen::VectorXd delta = velocity;
      if (finite(rp)) {
        const Eigen::VectorXd rvv = (2.0 / kProbe) * ((rp - r) / kProbe - jac * velocity);
        const Eigen::VectorXd accel = -solver.solve(jac.transpose() * rvv);
        const double scale = std::sqrt(velocity.dot(jtj.diagonal().cwiseMax(1e-12).cwiseProduct(velocity)));
        const double ratio =
            2.0 * std::sqrt(accel.dot(jtj.diagonal().cwiseMax(1e-12).cwiseProduct(accel))) / scale;
        if (accel.allFinite() && ratio <= 0.75) delta += 0.5 * accel;
      }
      const Eigen::VectorXd trial = p + delta;
      const Eigen::VectorXd rt = residuals(tf.from_vector(trial), nullptr);
      const double trial_cost = finite(rt) ? rt.squaredNorm() : std::numeric_limits<double>::infinity();
      if (trial_cost <= cost) {
        accepted = true;
        const double rms_gain = std::sqrt(cost / static_cast<double>(m)) -
                                std::sqrt(trial_cost / static_cast<double>(m));
        converged = delta.cwiseAbs().maxCoeff() < spec.tol || rms_gain < spec.tol;
        p = trial;
        r = rt;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-9);
        if (progress) progress(iterations, cost, tf.from_vector(p));
      } else {
        lambda *= 4.0;
      }
    }
    // No improving step along any damping: already at a (local) minimum.
    if (!accepted) converged = true;
  }
  if (!converged) {
    throw Error(ErrorCode::FitDiverged, "no convergence after " + std::to_string(spec.max_iterations) +
                                            " iterations, rms log residual " +
                                            std::to_string(std::sqrt(cost / static_cast<double>(m))));
  }

  CalibrationResult result;
  result.device = tf.from_vector(p);
  result.free = spec.free;
  result.iterations = iterations;
  residuals(result.device, &result.rows);
  result.rms_log_residual = std::sqrt(cost / static_cast<double>(m));
  return result;
}

nlohmann::ordered_json calibration_to_json(const CalibrationResult& result) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json fitted;
  for (auto p : result.free) {
    const double v = p == KineticParam::K0 ? result.device.k0
                     : p == KineticParam::Ea ? result.device.e_a
                                             : result.device.r_th_eff;
    fitted[std::string(to_string(p))] = v;
  }
  j["fitted"] = std::move(fitted);
  j["device"] = experiment_to_json([&] {
    ExperimentConfig c;
    c.device = result.device;
    return c;
  }())["device"];
  j["iterations"] = result.iterations;
  j["rms_log_residual"] = result.rms_log_residual;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json o;
    o["pulse_length_ns"] = row.point.pulse_length_ns ? nlohmann::ordered_json(*row.point.pulse_length_ns) : nullptr;
    o["ambient_K"] = row.point.ambient ? nlohmann::ordered_json(*row.point.ambient) : nullptr;
    o["measured"] = row.point.pulses;
    o["predicted"] = row.predicted;
    o["pulses_to_flip"] = row.pulses_to_flip ? nlohmann::ordered_json(*row.pulses_to_flip) : nullptr;
    o["relative_error"] = row.relative_error;
    rows.push_back(std::move(o));
  }
  j["residuals"] = std::move(rows);
  return j;
}

}  // namespace xhammer
