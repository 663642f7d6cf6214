#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "xhammer/alpha_extraction.hpp"
#include "xhammer/alpha_kernel.hpp"
#include "xhammer/error.hpp"
#include "xhammer/thermal_grid.hpp"

using namespace xhammer;

namespace {

PowerSweepSamples synthetic(double r_th, const std::vector<std::pair<Offset, double>>& couplings,
                            std::size_t rows = 3, std::size_t cols = 3) {
  PowerSweepSamples s;
  s.source_cell = {1, 1};
  s.ambient = 300.0;
  s.powers = {0.0, 2.5e-5, 5e-5, 7.5e-5, 1e-4, 1.5e-4, 2e-4};
  for (double p : s.powers) {
    CellGrid<double> t(rows, cols, 300.0);
    t(1, 1) = 300.0 + r_th * p;
    for (const auto& [d, a] : couplings) t(1 + d.di, 1 + d.dj) = 300.0 + a * r_th * p;
    s.temperatures.push_back(t);
  }
  return s;
}

const AlphaKernel& solved_kernel(bool homogeneous) {
  static const auto make = [](bool homo) {
    CrossbarGeometry g;
    if (homo) g.material_conductivities = {1.4, 1.4, 1.4, 1.4, 1.4};
    const ThermalGrid grid = build_grid(g, 5.0);
    const auto samples = sweep_power(grid, {2, 2}, default_sweep_powers(), 300.0);
    const auto fit = fit_thermal_resistance(samples);
    CHECK(fit.r_squared >= 0.9999);
    return extract_alpha_kernel(samples, fit.r_th);
  };
  static const AlphaKernel layered = make(false);
  static const AlphaKernel homo = make(true);
  return homogeneous ? homo : layered;
}

}  // namespace

TEST_CASE("OLS on exact linear data") {
  const std::vector<double> x = {0.0, 1e-4, 2e-4, 3e-4};
  std::vector<double> y;
  for (double v : x) y.push_back(300.0 + 1e6 * v);
  const LinearFit f = fit_line(x, y);
  CHECK(std::abs(f.slope - 1e6) / 1e6 <= 1e-10);
  CHECK(std::abs(f.intercept - 300.0) <= 1e-10 * 300.0);
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-point sweep gives the slope") {
  PowerSweepSamples s;
  s.source_cell = {0, 0};
  s.powers = {0.0, 1e-4};
  s.temperatures = {CellGrid<double>(1, 1, 300.0), CellGrid<double>(1, 1, 350.0)};
  const auto fit = fit_thermal_resistance(s);
  CHECK(std::abs(fit.r_th - 5e5) / 5e5 <= 1e-10);
}

TEST_CASE("synthetic sweep recovers r_th and every coupling") {
  const double r_th = 1e6;
  const std::vector<std::pair<Offset, double>> couplings = {
      {{0, 1}, 0.25}, {{0, -1}, 0.25}, {{1, 0}, 0.125}, {{-1, 1}, 0.0625}, {{1, 1}, 5e-4}};
  const auto s = synthetic(r_th, couplings);
  const auto fit = fit_thermal_resistance(s);
  CHECK(std::abs(fit.r_th - r_th) / r_th <= 1e-10);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  const AlphaKernel k = extract_alpha_kernel(s, fit.r_th);
  CHECK(std::abs(k.at({0, 0}) - 1.0) <= 1e-10);
  for (const auto& [d, a] : couplings) {
    if (a < kAlphaTruncation) {
      CHECK(k.alpha.count(d) == 0);
      CHECK(k.at(d) == 0.0);
    } else {
      CHECK(std::abs(k.at(d) - a) / a <= 1e-10);
    }
  }
  // Cells at ambient throughout fall below the truncation.
  CHECK(k.alpha.count({-1, -1}) == 0);
  CHECK(k.coupling_sum() == doctest::Approx(0.25 + 0.25 + 0.125 + 0.0625));
}

TEST_CASE("degenerate sweeps are rejected") {
  const std::vector<double> same = {1e-4, 1e-4, 1e-4};
  const std::vector<double> y = {300.0, 301.0, 302.0};
  try {
    fit_line(same, y);
    FAIL("expected DegenerateFit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFit);
  }
  const std::vector<double> one = {1e-4};
  const std::vector<double> y1 = {300.0};
  CHECK_THROWS_AS(fit_line(one, y1), Error);

  auto s = synthetic(1e6, {});
  for (auto& t : s.temperatures) t(1, 1) += 5.0;  // intercept off the ambient
  try {
    fit_thermal_resistance(s);
    FAIL("expected DegenerateFit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFit);
  }
  CHECK_THROWS_AS(extract_alpha_kernel(synthetic(1e6, {}), 0.0), Error);
}

TEST_CASE("single-cell crossbar yields the self term only") {
  CrossbarGeometry g;
  g.rows = g.cols = 1;
  const ThermalGrid grid = build_grid(g, 5.0);
  const auto s = sweep_power(grid, {0, 0}, default_sweep_powers(), 300.0);
  const auto fit = fit_thermal_resistance(s);
  const AlphaKernel k = extract_alpha_kernel(s, fit.r_th);
  CHECK(k.alpha.size() == 1);
  CHECK(k.at({0, 0}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(k.coupling_sum() == 0.0);
}

TEST_CASE("solved sweep is linear and the kernel keeps its invariants") {
  const AlphaKernel& k = solved_kernel(false);
  CHECK(std::abs(k.at({0, 0}) - 1.0) <= 1e-6);
  CHECK(k.coupling_sum() < 1.0);
  for (const auto& [d, e] : k.alpha) {
    CHECK(e.value > 0.0);
    CHECK(e.value <= 1.0);
    CHECK(e.r_squared >= 0.9999);
    // Mirror images about the centred source.
    for (Offset m : {Offset{-d.di, d.dj}, Offset{d.di, -d.dj}}) {
      REQUIRE(k.alpha.count(m) == 1);
      CHECK(std::abs(k.at(m) - e.value) <= 0.01 * e.value);
    }
  }
  CHECK(k.at({0, 1}) > k.at({0, 2}));
  CHECK(k.at({1, 0}) > k.at({2, 0}));
}

TEST_CASE("homogeneous stack gives a four-fold symmetric kernel decaying with distance") {
  const AlphaKernel& k = solved_kernel(true);
  CHECK(std::abs(k.at({0, 0}) - 1.0) <= 1e-6);
  CHECK(k.coupling_sum() < 1.0);
  for (const auto& [d, e] : k.alpha) {
    for (Offset m : {Offset{-d.di, d.dj}, Offset{d.di, -d.dj}, Offset{d.dj, d.di}, Offset{-d.dj, -d.di}}) {
      REQUIRE(k.alpha.count(m) == 1);
      CHECK(std::abs(k.at(m) - e.value) <= 0.01 * e.value);
    }
    for (const auto& [d2, e2] : k.alpha) {
      if (d.di * d.di + d.dj * d.dj < d2.di * d2.di + d2.dj * d2.dj) CHECK(e.value > e2.value);
    }
  }
}

TEST_CASE("kernel artifact round trip") {
  AlphaKernel k;
  k.source_cell = {2, 2};
  k.r_th = 1.0661e7;
  k.ambient = 300.0;
  k.alpha[{0, 0}] = {1.0, 1.0};
  k.alpha[{0, 1}] = {0.0412345678901234, 0.99999};
  k.alpha[{-1, 0}] = {0.03, 1.0};
  const auto path = std::filesystem::temp_directory_path() / "xhammer_test_kernel.json";
  save_kernel(k, path);
  const AlphaKernel back = load_kernel(path);
  std::filesystem::remove(path);
  CHECK(back.r_th == k.r_th);
  CHECK(back.ambient == k.ambient);
  CHECK(back.alpha == k.alpha);

  const auto j = kernel_to_json(k);
  CHECK(j["alpha"][0]["di"] == -1);
  CHECK(j["alpha"][1]["dj"] == 0);

  nlohmann::json missing_self = {{"ambient_K", 300.0}, {"r_th_K_per_W", 1e6},
                                 {"alpha", {{{"di", 0}, {"dj", 1}, {"value", 0.1}, {"r2", 1.0}}}}};
  CHECK_THROWS_AS(kernel_from_json(missing_self), Error);
  nlohmann::json too_big = {{"ambient_K", 300.0}, {"r_th_K_per_W", 1e6},
                            {"alpha", {{{"di", 0}, {"dj", 0}, {"value", 1.0}, {"r2", 1.0}},
                                       {{"di", 0}, {"dj", 1}, {"value", 1.5}, {"r2", 1.0}}}}};
  CHECK_THROWS_AS(kernel_from_json(too_big), Error);
  CHECK_THROWS_AS(load_kernel("/nonexistent/kernel.json"), Error);
}

TEST_CASE("with_ambient relabels only the ambient") {
  AlphaKernel k = AlphaKernel::isolated(300.0, 1e6);
  const AlphaKernel hot = k.with_ambient(350.0);
  CHECK(hot.ambient == 350.0);
  CHECK(hot.r_th == k.r_th);
  CHECK(hot.alpha == k.alpha);
}
