#include <doctest.h>

#include <random>

#include "xhammer/crosstalk_hub.hpp"
#include "xhammer/error.hpp"

using namespace xhammer;

namespace {

AlphaKernel kernel_with(std::initializer_list<std::pair<Offset, double>> entries) {
  AlphaKernel k = AlphaKernel::isolated(300.0, 1e6);
  for (const auto& [d, a] : entries) k.alpha[d] = {a, 1.0};
  return k;
}

AlphaKernel cross_kernel() {
  return kernel_with({{{0, 1}, 0.3}, {{0, -1}, 0.3}, {{1, 0}, 0.2}, {{-1, 0}, 0.2}, {{1, 1}, 0.05},
                      {{-1, -1}, 0.05}, {{1, -1}, 0.05}, {{-1, 1}, 0.05}});
}

}  // namespace

TEST_CASE("ambient array receives nothing") {
  const CellGrid<double> t(5, 5, 300.0);
  const auto f = crosstalk_temperatures(t, cross_kernel(), 300.0);
  for (double v : f.t_in.values()) CHECK(v == 0.0);
}

TEST_CASE("one hot neighbour") {
  CellGrid<double> t(5, 5, 300.0);
  t(2, 2) = 400.0;
  const auto f = crosstalk_temperatures(t, kernel_with({{{0, 1}, 0.3}}), 300.0);
  CHECK(f.t_in(2, 3) == doctest::Approx(30.0));
  CHECK(f.t_in(2, 1) == 0.0);  // offset absent from the kernel
  CHECK(f.t_in(2, 2) == 0.0);
}

TEST_CASE("two symmetric neighbours superpose") {
  CellGrid<double> t(5, 5, 300.0);
  t(2, 1) = 400.0;
  t(2, 3) = 400.0;
  const auto f = crosstalk_temperatures(t, cross_kernel(), 300.0);
  CHECK(f.t_in(2, 2) == doctest::Approx(60.0));
}

TEST_CASE("edge cells lose the offsets that leave the array") {
  CellGrid<double> t(3, 3, 300.0);
  t(0, 0) = 350.0;
  const auto f = crosstalk_temperatures(t, cross_kernel(), 300.0);
  CHECK(f.t_in(0, 1) == doctest::Approx(15.0));
  CHECK(f.t_in(1, 0) == doctest::Approx(10.0));
  CHECK(f.t_in(1, 1) == doctest::Approx(2.5));
  CHECK(f.t_in(2, 2) == 0.0);
}

TEST_CASE("own temperature never feeds back") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(300.0, 500.0);
  CellGrid<double> t(4, 6);
  for (auto& v : t.values()) v = u(rng);
  const AlphaKernel k = cross_kernel();
  const auto base = crosstalk_temperatures(t, k, 300.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CellGrid<double> bumped = t;
      bumped(i, j) += 123.0;
      CHECK(crosstalk_temperatures(bumped, k, 300.0).t_in(i, j) == base.t_in(i, j));
    }
  }
}

TEST_CASE("linear in the over-temperatures") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  CellGrid<double> a(5, 5), b(5, 5), sum(5, 5);
  for (std::size_t k = 0; k < 25; ++k) {
    a.values()[k] = 300.0 + u(rng);
    b.values()[k] = 300.0 + u(rng);
    sum.values()[k] = a.values()[k] + 2.0 * (b.values()[k] - 300.0);
  }
  const AlphaKernel k = cross_kernel();
  const auto fa = crosstalk_temperatures(a, k, 300.0);
  const auto fb = crosstalk_temperatures(b, k, 300.0);
  const auto fs = crosstalk_temperatures(sum, k, 300.0);
  for (std::size_t n = 0; n < 25; ++n) {
    CHECK(fs.t_in.values()[n] == doctest::Approx(fa.t_in.values()[n] + 2.0 * fb.t_in.values()[n]));
  }
}

TEST_CASE("mirror equivariance for a symmetric kernel") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(300.0, 450.0);
  CellGrid<double> t(4, 5), m(4, 5);
  for (auto& v : t.values()) v = u(rng);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) m(i, 4 - j) = t(i, j);
  }
  const auto ft = crosstalk_temperatures(t, cross_kernel(), 300.0);
  const auto fm = crosstalk_temperatures(m, cross_kernel(), 300.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(fm.t_in(i, 4 - j) == doctest::Approx(ft.t_in(i, j)));
  }
}

TEST_CASE("argument checks") {
  const CellGrid<double> t(3, 3, 300.0);
  CellGrid<double> wrong(2, 3);
  const CrosstalkHub hub(cross_kernel(), 300.0);
  try {
    hub.apply(t, wrong);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  CHECK_THROWS_AS(CrosstalkHub(cross_kernel(), 350.0), Error);
}
