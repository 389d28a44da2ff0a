#pragma once

// Independent reference values for the test suite. Everything here is
// deliberately naive (series, image sums, closed forms) and shares no code
// with the implementation paths it checks.

#include <functional>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/snapshot.hpp"

namespace oracles {

/// Modified Bessel I0 by its power series.
double bessel_i0(double x);

/// Heat kernel on a circle of circumference L as a truncated image sum,
/// unit total mass.
double wrapped_heat_kernel(double x, double center, double t, double L,
                           int images = 12);

geoflow::ScalarField sample_wrapped_kernel(geoflow::GridPtr grid, double t,
                                           double center);

/// Differential entropy of the 1-d Gaussian of variance 2t.
double gaussian_entropy(double t);

/// Plain second-order central difference of sampled values.
std::vector<double> central_difference(const std::vector<double>& values,
                                       double dt);

/// max |a - b| over nodes.
double max_abs_diff(const geoflow::ScalarField& a,
                    const geoflow::ScalarField& b);
double max_abs(const geoflow::ScalarField& a);

/// Deterministic smooth positive random field exp(band-limited noise).
geoflow::ScalarField random_positive_field(geoflow::GridPtr grid,
                                           unsigned long long seed,
                                           double amplitude = 0.5,
                                           int max_mode = 4);

}  // namespace oracles
