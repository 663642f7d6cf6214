// Command-line front end: kernel extraction, single attacks, sweeps and
// kinetics calibration.
//
// Exit status: 0 on success (for simulate: the victim flipped), 2 when a
// simulated victim did not flip within max_pulses, 1 on any error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xhammer/calibration.hpp"
#include "xhammer/error.hpp"
#include "xhammer/experiment.hpp"
#include "xhammer/parallel.hpp"

namespace fs = std::filesystem;
using namespace xhammer;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal crosstalk hammering simulator for memristive crossbars"};
  app.require_subcommand(1);
  std::size_t threads = default_thread_count();
  bool verbose = false;
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("-v,--verbose", verbose, "progress on stderr");

  std::string config, output, reference;
  bool trace = false;

  auto* extract = app.add_subcommand("extract-alpha", "extract the thermal coupling kernel");
  extract->add_option("-c,--config", config, "experiment config")->required()->check(CLI::ExistingFile);
  extract->add_option("-o,--output", output, "kernel artifact")->required();

  auto* sim = app.add_subcommand("simulate", "run one hammering attack");
  sim->add_option("-c,--config", config, "experiment config")->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--output", output, "directory for result.json and trace.csv");
  sim->add_flag("--trace", trace, "run all max_pulses and record a per-pulse trace");

  auto* sweep = app.add_subcommand("sweep", "pulses-to-flip over the config's sweep block");
  sweep->add_option("-c,--config", config, "experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--output", output, "CSV file (default stdout)");

  auto* cal = app.add_subcommand("calibrate", "fit switching kinetics to measured pulse counts");
  cal->add_option("-c,--config", config, "experiment config")->required()->check(CLI::ExistingFile);
  cal->add_option("-r,--reference", reference, "reference points")->required()->check(CLI::ExistingFile);
  cal->add_option("-o,--output", output, "fit report (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the generic error status.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig cfg = load_experiment(config);
    KernelCache cache = KernelCache::from_environment();
    if (verbose) std::cerr << "config " << config << ", " << threads << " thread(s)\n";

    if (*extract) {
      if (cfg.alpha_source != "compute") {
        throw Error(ErrorCode::ConfigInvalid, "extract-alpha needs alpha_source \"compute\"");
      }
      const KernelReport report = compute_kernel(kernel_request(cfg), threads);
      warn(report.warnings);
      if (fs::path(output).has_parent_path()) fs::create_directories(fs::path(output).parent_path());
      save_kernel(report.kernel, output);
      std::cout << "r_th " << report.kernel.r_th << " K/W (r2 " << report.fit_r_squared << "), "
                << report.kernel.alpha.size() << " entries, coupling sum "
                << report.kernel.coupling_sum() << '\n';
      return 0;
    }

    if (*sim) {
      const AlphaKernel kernel = resolve_kernel(cfg, cache, threads);
      if (verbose) std::cerr << "kernel ready, coupling sum " << kernel.coupling_sum() << '\n';
      const AttackResult result = simulate(cfg, kernel, trace);
      warn(result.warnings);
      const std::string json = attack_result_to_json(result).dump(2) + "\n";
      if (output.empty()) {
        std::cout << json;
      } else {
        write_file(fs::path(output) / "result.json", json);
        if (trace) write_file(fs::path(output) / "trace.csv", trace_to_csv(result.trace));
      }
      return result.flipped ? 0 : 2;
    }

    if (*sweep) {
      const SweepResult result = run_sweep(cfg, cache, threads);
      const std::string csv = sweep_to_csv(result);
      if (output.empty()) std::cout << csv;
      else write_file(output, csv);
      return 0;
    }

    if (*cal) {
      const CalibrationSpec spec = load_calibration(reference);
      CalibrationProgress progress;
      if (verbose) {
        progress = [](std::size_t it, double cost, const DeviceParams& d) {
          std::cerr << "iteration " << it << ": cost " << cost << ", k0 " << d.k0 << ", e_a " << d.e_a
                    << ", r_th_eff " << d.r_th_eff << '\n';
        };
      }
      const CalibrationResult result = calibrate_kinetics(cfg, spec, cache, threads, progress);
      const std::string json = calibration_to_json(result).dump(2) + "\n";
      if (output.empty()) std::cout << json;
      else write_file(output, json);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid input\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
