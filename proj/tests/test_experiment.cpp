#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "xhammer/calibration.hpp"
#include "xhammer/error.hpp"
#include "xhammer/experiment.hpp"

using namespace xhammer;
namespace fs = std::filesystem;

namespace {

// 3x3 array on a coarse, shallow grid so that kernels solve in well under a second.
nlohmann::json small_config() {
  return {{"geometry",
           {{"rows", 3}, {"cols", 3}, {"electrode_spacing", 20}, {"lateral_margin", 10},
            {"substrate_thickness", 20}, {"insulator_thickness", 10}}},
          {"program", {{"aggressors", {{1, 1}}}, {"victim", {1, 2}}, {"pulse_length_ns", 50}}}};
}

std::vector<std::string> violations_of(const nlohmann::json& j) {
  try {
    experiment_from_json(j);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v) {
    if (s.find(what) != std::string::npos) return true;
  }
  return false;
}

fs::path scratch_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const ExperimentConfig cfg = experiment_from_json({{"geometry", nlohmann::json::object()}});
  CHECK(cfg.geometry == CrossbarGeometry{});
  CHECK(cfg.device == DeviceParams{});
  CHECK(cfg.ambient == 300.0);
  CHECK(cfg.program.aggressors == std::vector<CellIndex>{{2, 2}});
  CHECK(cfg.program.victim == CellIndex{2, 3});
  CHECK(cfg.program.v_set == 1.05);
  CHECK(cfg.alpha_source == "compute");
  const CellGrid<double> x = initial_states(cfg);
  CHECK(x(2, 2) == 1.0);
  CHECK(x(2, 3) == 0.0);
  CHECK(x(0, 0) == 0.0);
}

TEST_CASE("config JSON round trip") {
  nlohmann::json j = small_config();
  j["device"] = {{"k0", 2e12}, {"e_a", 0.7}};
  j["ambient_K"] = 320.0;
  j["init_states"] = {{"HRS", "HRS", 0.25}, {"HRS", "LRS", "HRS"}, {"HRS", "HRS", "HRS"}};
  j["sweep"] = {{"variable", "pulse_length"}, {"values", {20, 50, 100}}};
  j["wire_resistance_ohm"] = 2.5;
  const ExperimentConfig cfg = experiment_from_json(j);
  CHECK(initial_states(cfg)(0, 2) == 0.25);
  const ExperimentConfig back = experiment_from_json(nlohmann::json::parse(experiment_to_json(cfg).dump()));
  CHECK(back == cfg);
}

TEST_CASE("every violation is reported with its path") {
  nlohmann::json j = small_config();
  j["geometry"]["electrode_spacing"] = -5;
  j["device"] = {{"g_lrs", 1e-7}, {"bogus", 1}};
  j["program"]["victim"] = {7, 7};
  j["ambient_K"] = 50;
  j["init_states"] = {{"HRS"}};
  j["sweep"] = {{"variable", "ambient"}, {"values", {300, 300}}};
  const auto v = violations_of(j);
  CHECK(mentions(v, "geometry.electrode_spacing"));
  CHECK(mentions(v, "device.g_lrs"));
  CHECK(mentions(v, "device.bogus"));
  CHECK(mentions(v, "program.victim"));
  CHECK(mentions(v, "ambient_K"));
  CHECK(mentions(v, "init_states"));
  CHECK(mentions(v, "sweep.values[1]"));
  CHECK(v.size() >= 7);

  CHECK(mentions(violations_of({{"device", nlohmann::json::object()}}), "geometry: required"));
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), Error);
}

TEST_CASE("kernel cache computes once and survives a restart") {
  const ExperimentConfig cfg = experiment_from_json(small_config());
  const fs::path dir = scratch_dir("xhammer_test_cache");
  AlphaKernel first;
  {
    KernelCache cache(dir);
    first = resolve_kernel(cfg, cache);
    CHECK(cache.computed() == 1);
    CHECK(resolve_kernel(cfg, cache) == first);
    CHECK(cache.computed() == 1);
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".json";
  CHECK(files == 1);
  KernelCache reopened(dir);
  CHECK(resolve_kernel(cfg, reopened) == first);
  CHECK(reopened.computed() == 0);

  const AlphaKernel direct = compute_kernel(kernel_request(cfg)).kernel;
  CHECK(direct == first);

  ExperimentConfig wider = cfg;
  wider.geometry.electrode_spacing = 30;
  CHECK(kernel_request(wider).cache_key() != kernel_request(cfg).cache_key());
  ExperimentConfig other_device = cfg;
  other_device.device.k0 *= 2.0;
  CHECK(kernel_request(other_device).cache_key() == kernel_request(cfg).cache_key());
  fs::remove_all(dir);
}

TEST_CASE("kernel file as alpha source") {
  const ExperimentConfig cfg = experiment_from_json(small_config());
  const fs::path dir = scratch_dir("xhammer_test_source");
  KernelCache cache;
  const AlphaKernel k = resolve_kernel(cfg, cache);
  save_kernel(k, dir / "k.json");
  ExperimentConfig from_file = cfg;
  from_file.alpha_source = (dir / "k.json").string();
  from_file.ambient = 330.0;
  const AlphaKernel loaded = resolve_kernel(from_file, cache);
  CHECK(loaded.ambient == 330.0);
  CHECK(loaded.alpha == k.alpha);
  CHECK(cache.computed() == 1);
  fs::remove_all(dir);
}

TEST_CASE("simulation output formats") {
  const ExperimentConfig cfg = experiment_from_json(small_config());
  KernelCache cache;
  const AlphaKernel k = resolve_kernel(cfg, cache);
  const AttackResult r = simulate(cfg, k);
  REQUIRE(r.flipped);
  const auto j = attack_result_to_json(r);
  CHECK(j["flipped"] == true);
  CHECK(j["pulses_to_flip"] == *r.pulses_to_flip);
  CHECK(j["final_states"]["x"].size() == 3);

  ExperimentConfig short_run = cfg;
  short_run.program.max_pulses = 4;
  const AttackResult t = simulate(short_run, k, true);
  const std::string csv = trace_to_csv(t.trace);
  CHECK(csv.rfind("pulse_index,victim_x,victim_T_K,aggressor_T_K\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(attack_result_to_json(t)["pulses_to_flip"].is_null());
}

TEST_CASE("sweeps come back in ascending order") {
  nlohmann::json j = small_config();
  j["sweep"] = {{"variable", "ambient"}, {"values", {350, 300, 325}}};
  const ExperimentConfig cfg = experiment_from_json(j);
  KernelCache cache;
  const SweepResult s = run_sweep(cfg, cache, 2);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0].value == 300.0);
  CHECK(s.rows[2].value == 350.0);
  CHECK(cache.computed() == 1);
  for (std::size_t k = 1; k < 3; ++k) CHECK(*s.rows[k].pulses_to_flip < *s.rows[k - 1].pulses_to_flip);
  const std::string csv = sweep_to_csv(s);
  CHECK(csv.rfind("swept_value,pulses_to_flip,flipped\n", 0) == 0);

  // Each point matches a direct simulation at that ambient.
  for (const auto& row : s.rows) {
    const ExperimentConfig point = with_swept_value(cfg, SweepVariable::Ambient, row.value);
    CHECK(simulate(point, resolve_kernel(point, cache)).pulses_to_flip == row.pulses_to_flip);
  }

  nlohmann::json sp = small_config();
  sp["sweep"] = {{"variable", "spacing"}, {"values", {40, 20}}};
  KernelCache fresh;
  const SweepResult spacing = run_sweep(experiment_from_json(sp), fresh);
  CHECK(fresh.computed() == 2);
  CHECK(*spacing.rows[0].pulses_to_flip < *spacing.rows[1].pulses_to_flip);
}

TEST_CASE("calibration recovers a known rate prefactor") {
  const ExperimentConfig truth = experiment_from_json(small_config());
  KernelCache cache;
  const AlphaKernel k = resolve_kernel(truth, cache);

  CalibrationSpec spec;
  for (double ns : {20.0, 50.0, 100.0}) {
    ReferencePoint p;
    p.pulse_length_ns = ns;
    p.pulses = 1e5;  // generous cap while generating the data
    const ExperimentConfig c = calibration_point_config(truth, p, truth.device, 30.0);
    p.pulses = *simulate(c, k).flip_position + 0.5;
    spec.points.push_back(p);
  }
  ExperimentConfig start = truth;
  start.device.k0 *= 4.0;
  const CalibrationResult fit = calibrate_kinetics(start, spec, cache);
  CHECK(std::abs(fit.device.k0 / truth.device.k0 - 1.0) < 1e-3);
  CHECK(fit.rms_log_residual < 1e-3);
  CHECK(fit.device.e_a == truth.device.e_a);
  for (const auto& row : fit.rows) CHECK(std::abs(row.relative_error) < 1e-3);
  CHECK(calibration_to_json(fit)["fitted"].contains("k0"));
}

TEST_CASE("calibration reference parsing") {
  const CalibrationSpec s = calibration_from_json(
      {{"free", {"k0", "e_a"}}, {"points", {{{"pulse_length_ns", 10}, {"ambient_K", 273}, {"pulses", 33030}},
                                            {{"ambient_K", 373}, {"pulses", 184}}}}});
  CHECK(s.free == std::vector<KineticParam>{KineticParam::K0, KineticParam::Ea});
  CHECK(s.points[0].pulse_length_ns == 10.0);
  CHECK_FALSE(s.points[1].pulse_length_ns.has_value());
  CHECK(s.points[1].ambient == 373.0);
  CHECK_THROWS_AS(calibration_from_json({{"free", {"k0", "bogus"}}, {"points", {{{"pulses", 5}}}}}),
                  ValidationError);
  CHECK_THROWS_AS(calibration_from_json({{"free", {"k0", "e_a"}}, {"points", {{{"pulses", 5}}}}}),
                  ValidationError);
  CHECK_THROWS_AS(calibration_from_json({{"points", nlohmann::json::array()}}), ValidationError);
}
