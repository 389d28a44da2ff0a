#include "oracles.hpp"

#include <cmath>
#include <random>

namespace oracles {

double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double wrapped_heat_kernel(double x, double center, double t, double L,
                           int images) {
  const double norm = 1.0 / std::sqrt(4.0 * M_PI * t);
  double s = 0.0;
  for (int j = -images; j <= images; ++j) {
    const double d = x - center + j * L;
    s += norm * std::exp(-d * d / (4.0 * t));
  }
  return s;
}

geoflow::ScalarField sample_wrapped_kernel(geoflow::GridPtr grid, double t,
                                           double center) {
  const double L = grid->period(0);
  return geoflow::ScalarField::sample(grid, [=](const double* x) {
    return std::max(wrapped_heat_kernel(x[0], center, t, L), 1e-300);
  });
}

double gaussian_entropy(double t) {
  return 0.5 * (1.0 + std::log(4.0 * M_PI * t));
}

std::vector<double> central_difference(const std::vector<double>& values,
                                       double dt) {
  std::vector<double> out(values.size(), std::nan(""));
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
  return out;
}

double max_abs_diff(const geoflow::ScalarField& a,
                    const geoflow::ScalarField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs(const geoflow::ScalarField& a) {
  return std::max(std::abs(a.min()), std::abs(a.max()));
}

geoflow::ScalarField random_positive_field(geoflow::GridPtr grid,
                                           unsigned long long seed,
                                           double amplitude, int max_mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-amplitude, amplitude);
  struct Term {
    int axis, k;
    double c, s;
  };
  std::vector<Term> terms;
  for (int a = 0; a < grid->dim(); ++a)
    for (int k = 1; k <= max_mode; ++k)
      terms.push_back({a, k, amp(rng), amp(rng)});
  return geoflow::ScalarField::sample(grid, [&, g = grid.get()](const double* x) {
    double v = 0.0;
    for (const auto& t : terms) {
      const double arg = 2.0 * M_PI * t.k * x[t.axis] / g->period(t.axis);
      v += t.c * std::cos(arg) + t.s * std::sin(arg);
    }
    return std::exp(v);
  });
}

}  // namespace oracles
