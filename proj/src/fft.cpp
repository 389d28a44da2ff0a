#include "geoflow/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "geoflow/errors.hpp"

namespace geoflow {
namespace {

// One forward/backward complex 1-D plan pair per line length. Plans are
// created with FFTW_UNALIGNED so they can run on any buffer via the
// new-array execute interface. Planning is serialized; execution is not.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

PlanPair plans_for(int n) {
  static std::mutex mu;
  static std::map<int, PlanPair> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> buf(n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  PlanPair pp;
  pp.forward = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  pp.backward = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[n] = pp;
  return pp;
}

}  // namespace

namespace fft {

void derivative(const Grid& grid, int axis, std::span<const double> in,
                std::span<double> out) {
  const int n = grid.nodes(axis);
  const double L = grid.period(axis);
  const std::size_t stride = grid.stride(axis);
  const std::size_t total = grid.size();
  const std::size_t nlines = total / static_cast<std::size_t>(n);

  PlanPair plans = plans_for(n);
  std::vector<std::complex<double>> line(n);
  auto* pline = reinterpret_cast<fftw_complex*>(line.data());

  // Wavenumbers 2*pi*j/L for j in [-n/2+1, n/2]; Nyquist zeroed.
  std::vector<double> k(n);
  const double dk = 2.0 * M_PI / L;
  for (int j = 0; j < n; ++j) {
    int jj = (j <= n / 2) ? j : j - n;
    k[j] = (j == n / 2) ? 0.0 : dk * jj;
  }
  const double inv_n = 1.0 / n;

  for (std::size_t l = 0; l < nlines; ++l) {
    // Base node of line l: all indices with index_axis = 0, enumerated in
    // row-major order of the remaining axes.
    std::size_t base;
    if (stride == 1) {
      base = l * static_cast<std::size_t>(n);
    } else {
      const std::size_t block = stride * static_cast<std::size_t>(n);
      base = (l / stride) * block + (l % stride);
    }
    for (int j = 0; j < n; ++j) line[j] = in[base + j * stride];
    fftw_execute_dft(plans.forward, pline, pline);
    for (int j = 0; j < n; ++j)
      line[j] *= std::complex<double>(0.0, k[j] * inv_n);
    fftw_execute_dft(plans.backward, pline, pline);
    for (int j = 0; j < n; ++j) out[base + j * stride] = line[j].real();
  }
}

}  // namespace fft

namespace fft {

namespace {

// In-place unnormalized transform of every line along `axis` of a complex
// row-major array.
void axis_transform(const Grid& grid, int axis, std::complex<double>* data,
                    bool forward) {
  const int n = grid.nodes(axis);
  const std::size_t stride = grid.stride(axis);
  const std::size_t nlines = grid.size() / static_cast<std::size_t>(n);
  PlanPair plans = plans_for(n);
  std::vector<std::complex<double>> line(n);
  auto* pline = reinterpret_cast<fftw_complex*>(line.data());
  for (std::size_t l = 0; l < nlines; ++l) {
    std::size_t base;
    if (stride == 1) {
      base = l * static_cast<std::size_t>(n);
    } else {
      const std::size_t block = stride * static_cast<std::size_t>(n);
      base = (l / stride) * block + (l % stride);
    }
    for (int j = 0; j < n; ++j) line[j] = data[base + j * stride];
    fftw_execute_dft(forward ? plans.forward : plans.backward, pline, pline);
    for (int j = 0; j < n; ++j) data[base + j * stride] = line[j];
  }
}

}  // namespace

void zero_nyquist(const Grid& grid, std::span<double> values) {
  const int dim = grid.dim();
  std::vector<std::complex<double>> buf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = values[i];
  for (int a = 0; a < dim; ++a) axis_transform(grid, a, buf.data(), true);
  bool touched = false;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto idx = grid.unravel(node);
    for (int a = 0; a < dim; ++a) {
      if (idx[a] == grid.nodes(a) / 2) {
        buf[node] = 0.0;
        touched = true;
        break;
      }
    }
  }
  if (!touched) return;  // cannot happen, but keeps intent clear
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : buf) c *= scale;
  for (int a = 0; a < dim; ++a) axis_transform(grid, a, buf.data(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = buf[i].real();
}

void apply_isotropic_multiplier(const Grid& grid, std::span<const double> in,
                                std::span<double> out,
                                const std::function<double(double)>& mult) {
  const int dim = grid.dim();
  std::vector<std::complex<double>> buf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = in[i];
  for (int a = 0; a < dim; ++a) axis_transform(grid, a, buf.data(), true);

  std::array<std::vector<double>, 3> ksq;
  for (int a = 0; a < dim; ++a) {
    const int n = grid.nodes(a);
    const double dk = 2.0 * M_PI / grid.period(a);
    ksq[a].resize(n);
    for (int j = 0; j < n; ++j) {
      const int jj = (j <= n / 2) ? j : j - n;
      ksq[a][j] = (dk * jj) * (dk * jj);
    }
  }
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto idx = grid.unravel(node);
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) k2 += ksq[a][idx[a]];
    buf[node] *= mult(k2) * scale;
  }
  for (int a = 0; a < dim; ++a) axis_transform(grid, a, buf.data(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = buf[i].real();
}

}  // namespace fft

ScalarField spectral_derivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim())
    throw input_error("spectral_derivative: axis out of range");
  if (!f.all_finite())
    throw input_error("spectral_derivative: non-finite values in input field");
  ScalarField out(f.grid_ptr());
  fft::derivative(f.grid(), axis, f.values(), out.values());
  return out;
}

}  // namespace geoflow
