#pragma once

#include <span>

#include "geoflow/field.hpp"
#include "geoflow/grid.hpp"

namespace geoflow {

/// d/dx_axis by discrete Fourier differentiation. Exact for band-limited
/// periodic fields; the Nyquist mode is mapped to zero (its sampled
/// derivative is indistinguishable from zero on the grid).
/// Throws input_error on non-finite input or axis out of range.
ScalarField spectral_derivative(const ScalarField& f, int axis);

namespace fft {
/// Raw-array form used by the operator kernels; `in` and `out` may alias.
void derivative(const Grid& grid, int axis, std::span<const double> in,
                std::span<double> out);

/// out = F^{-1}[ m(|k|^2) F[in] ] for a real isotropic multiplier given as
/// a callback on the squared wavenumber (solver preconditioners).
void apply_isotropic_multiplier(const Grid& grid, std::span<const double> in,
                                std::span<double> out,
                                const std::function<double(double)>& mult);

/// Remove the Nyquist plane along every axis in place. The antisymmetric
/// derivative maps that mode to zero, so explicit evolution leaves it
/// frozen; sampled near-kernel data deposits alias content there that
/// would otherwise never decay.
void zero_nyquist(const Grid& grid, std::span<double> values);
}  // namespace fft

}  // namespace geoflow
