#include <doctest.h>

#include <cmath>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "support/oracles.hpp"

using namespace geoflow;

TEST_CASE("derivative of a constant vanishes") {
  auto grid = make_grid({32}, {2 * M_PI});
  ScalarField f(grid);
  for (auto& x : f.values()) x = 3.7;
  ScalarField d = spectral_derivative(f, 0);
  CHECK(oracles::max_abs(d) <= 1e-13);
}

TEST_CASE("d/dx sin x = cos x to near rounding on T^1(2 pi)") {
  auto grid = make_grid({64}, {2 * M_PI});
  ScalarField f =
      ScalarField::sample(grid, [](const double* x) { return std::sin(x[0]); });
  ScalarField expected =
      ScalarField::sample(grid, [](const double* x) { return std::cos(x[0]); });
  CHECK(oracles::max_abs_diff(spectral_derivative(f, 0), expected) <= 1e-12);
}

TEST_CASE("2-d mixed harmonic, derivative along the second axis") {
  auto grid = make_grid({32, 32}, {2 * M_PI, 2 * M_PI});
  ScalarField f = ScalarField::sample(
      grid, [](const double* x) { return std::sin(x[0]) * std::cos(x[1]); });
  ScalarField expected = ScalarField::sample(
      grid, [](const double* x) { return -std::sin(x[0]) * std::sin(x[1]); });
  CHECK(oracles::max_abs_diff(spectral_derivative(f, 1), expected) <= 1e-12);
}

TEST_CASE("derivative handles a non-2pi period") {
  auto grid = make_grid({64}, {3.0});
  const double w = 2.0 * M_PI / 3.0;
  ScalarField f = ScalarField::sample(
      grid, [w](const double* x) { return std::sin(2.0 * w * x[0]); });
  ScalarField expected = ScalarField::sample(grid, [w](const double* x) {
    return 2.0 * w * std::cos(2.0 * w * x[0]);
  });
  CHECK(oracles::max_abs_diff(spectral_derivative(f, 0), expected) <= 1e-11);
}

TEST_CASE("linearity and product rule hold to spectral accuracy") {
  auto grid = make_grid({64}, {2 * M_PI});
  ScalarField f = ScalarField::sample(grid, [](const double* x) {
    return std::sin(2 * x[0]) + 0.3 * std::cos(x[0]);
  });
  ScalarField g = ScalarField::sample(
      grid, [](const double* x) { return std::cos(3 * x[0]); });

  ScalarField sum_deriv = spectral_derivative(f + g, 0);
  ScalarField deriv_sum = spectral_derivative(f, 0) + spectral_derivative(g, 0);
  CHECK(oracles::max_abs_diff(sum_deriv, deriv_sum) <= 1e-12);

  ScalarField lhs = spectral_derivative(f * g, 0);
  ScalarField rhs = f * spectral_derivative(g, 0) + g * spectral_derivative(f, 0);
  CHECK(oracles::max_abs_diff(lhs, rhs) <= 1e-10);
}

TEST_CASE("rejected inputs") {
  auto grid = make_grid({16}, {1.0});
  ScalarField f(grid);
  CHECK_THROWS_AS(spectral_derivative(f, 1), input_error);
  f[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(spectral_derivative(f, 0), input_error);
}
