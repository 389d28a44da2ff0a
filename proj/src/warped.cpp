#include "geoflow/warped.hpp"

#include <cmath>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/operators.hpp"

namespace geoflow {

namespace {

// Product node -> base node. Base axes come first, so with row-major
// storage the fiber block is contiguous per base node.
inline std::size_t base_of(std::size_t node, std::size_t fsize) {
  return node / fsize;
}

std::vector<ScalarField> partials_of(const ScalarField& f) {
  std::vector<ScalarField> d;
  for (int a = 0; a < f.grid().dim(); ++a)
    d.push_back(spectral_derivative(f, a));
  return d;
}

// g^{kl} d_k u d_l v on the base.
ScalarField base_grad_dot(const GeometrySnapshot& base, const ScalarField& u,
                          const ScalarField& v) {
  const int n = base.dim();
  const auto du = partials_of(u);
  const auto dv = partials_of(v);
  const auto& ginv = base.inverse_metric();
  ScalarField out(u.grid_ptr());
  for (std::size_t node = 0; node < u.grid().size(); ++node) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        s += ginv(k, l, node) * du[k][node] * dv[l][node];
    out[node] = s;
  }
  return out;
}

}  // namespace

WarpedSpec::WarpedSpec(SnapshotPtr base, GridPtr fiber)
    : base_(std::move(base)), fiber_(std::move(fiber)) {
  if (!base_ || !fiber_) throw input_error("warped spec: null base or fiber");
  q_ = fiber_->dim();
}

WarpedSpec::WarpedSpec(SnapshotPtr base, double q)
    : base_(std::move(base)), fiber_(nullptr), q_(q) {
  if (!base_) throw input_error("warped spec: null base");
  if (!(q > 0.0)) throw parameter_error("warped spec: q must be positive");
}

WarpedSnapshot build_warped(const WarpedSpec& spec) {
  if (!spec.has_fiber())
    throw input_error("build_warped: spec has no fiber grid");
  const GeometrySnapshot& base = spec.base();
  const Grid& bg = base.grid();
  const Grid& fg = *spec.fiber();
  const int n = bg.dim();
  const int q = fg.dim();
  if (n + q > 3)
    throw input_error("build_warped: product dimension exceeds 3");

  std::vector<int> nodes;
  std::vector<double> periods;
  for (int a = 0; a < n; ++a) {
    nodes.push_back(bg.nodes(a));
    periods.push_back(bg.period(a));
  }
  for (int a = 0; a < q; ++a) {
    nodes.push_back(fg.nodes(a));
    periods.push_back(fg.period(a));
  }
  GridPtr pg = make_grid(nodes, periods);
  const std::size_t fsize = fg.size();

  SymTensorField metric(pg);
  const ScalarField& phi = base.potential();
  const double inv_q = 1.0 / q;
  for (std::size_t node = 0; node < pg->size(); ++node) {
    const std::size_t b = base_of(node, fsize);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        metric.at(i, j, node) = base.metric()(i, j, b);
    const double warp = std::exp(-2.0 * phi[b] * inv_q);
    for (int a = n; a < n + q; ++a) metric.at(a, a, node) = warp;
  }

  WarpedSnapshot ws;
  ws.product = make_snapshot(std::move(metric), ScalarField(pg));
  ws.base = spec.base_ptr();
  ws.fiber = spec.fiber();
  double fv = 1.0;
  for (int a = 0; a < q; ++a) fv *= fg.period(a);
  ws.fiber_volume = fv;
  ws.n = n;
  ws.q = q;
  return ws;
}

ChristoffelField warped_christoffel(const WarpedSpec& spec) {
  WarpedSnapshot ws = build_warped(spec);
  const GeometrySnapshot& base = spec.base();
  const Grid& pg = ws.product->grid();
  const std::size_t fsize = ws.fiber->size();
  const int n = ws.n;
  const int q = ws.q;
  const double inv_q = 1.0 / q;

  const ChristoffelField& base_gamma = base.christoffel();
  const auto dphi = partials_of(base.potential());
  const auto& ginv = base.inverse_metric();
  const ScalarField& phi = base.potential();

  ChristoffelField out(ws.product->grid_ptr());
  for (std::size_t node = 0; node < pg.size(); ++node) {
    const std::size_t b = base_of(node, fsize);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          out.at(k, i, j, node) = base_gamma(k, i, j, b);
    const double warp = std::exp(-2.0 * phi[b] * inv_q);
    // Gamma^k_{aa} = q^{-1} g^{kl} d_l phi * g~_{aa}
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += ginv(k, l, b) * dphi[l][b];
      const double val = inv_q * s * warp;
      for (int a = n; a < n + q; ++a) out.at(k, a, a, node) = val;
    }
    // Gamma^a_{i a} = -(d_i phi / q)
    for (int i = 0; i < n; ++i) {
      const double val = -dphi[i][b] * inv_q;
      for (int a = n; a < n + q; ++a) out.at(a, i, a, node) = val;
    }
    // Gamma^a_{ij}, Gamma^k_{i a}, Gamma^c_{ab} all stay zero.
  }
  return out;
}

WarpedBlocks warped_hessian_blocks(const WarpedSpec& spec,
                                   const ScalarField& f) {
  const GeometrySnapshot& base = spec.base();
  require_same_grid(base.grid(), f.grid(), "warped_hessian_blocks");
  const double q = spec.q();
  ScalarField dot = base_grad_dot(base, base.potential(), f);
  WarpedBlocks blocks{hessian(base, f), ScalarField(f.grid_ptr())};
  for (std::size_t node = 0; node < f.grid().size(); ++node)
    blocks.fiber_coeff[node] = -dot[node] / q;
  return blocks;
}

WarpedBlocks warped_hessian_of(const WarpedSpec& spec, const ScalarField& v) {
  return warped_hessian_blocks(spec, v);
}

HessianNormSplit hessian_norm_split(const WarpedSpec& spec,
                                    const ScalarField& f, double t) {
  if (!(t > 0.0)) throw parameter_error("hessian_norm_split: t must be > 0");
  const GeometrySnapshot& base = spec.base();
  require_same_grid(base.grid(), f.grid(), "hessian_norm_split");
  const double q = spec.q();

  SymTensorField shifted = hessian(base, f);
  axpy(-1.0 / (2.0 * t), base.metric(), shifted);
  ScalarField horizontal = tensor_norm_sq(base, shifted);

  ScalarField dot = base_grad_dot(base, base.potential(), f);
  ScalarField vertical(f.grid_ptr());
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    const double w = dot[node] + q / (2.0 * t);
    vertical[node] = w * w / q;
  }
  return HessianNormSplit{horizontal + vertical, std::move(horizontal),
                          std::move(vertical)};
}

ScalarField warped_laplacian(const WarpedSnapshot& ws, const ScalarField& f) {
  const Grid& pg = ws.product->grid();
  require_same_grid(pg, f.grid(), "warped_laplacian");
  const GeometrySnapshot& base = *ws.base;
  const std::size_t fsize = ws.fiber->size();
  const int n = ws.n;
  const int q = ws.q;
  const double inv_q = 1.0 / q;
  const auto& ginv = base.inverse_metric();
  const auto& rho = base.measure_density();
  const ScalarField& phi = base.potential();

  // Witten part along base axes, divergence form with the base weight.
  std::vector<ScalarField> df;
  for (int a = 0; a < n; ++a) {
    ScalarField d(f.grid_ptr());
    fft::derivative(pg, a, f.values(), d.values());
    df.push_back(std::move(d));
  }
  ScalarField out(f.grid_ptr());
  ScalarField flux(f.grid_ptr());
  ScalarField dflux(f.grid_ptr());
  for (int i = 0; i < n; ++i) {
    for (std::size_t node = 0; node < pg.size(); ++node) {
      const std::size_t b = base_of(node, fsize);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += ginv(i, j, b) * df[j][node];
      flux[node] = rho[b] * s;
    }
    fft::derivative(pg, i, flux.values(), dflux.values());
    for (std::size_t node = 0; node < pg.size(); ++node)
      out[node] += dflux[node] / rho[base_of(node, fsize)];
  }

  // Fiber part: e^{+2 phi/q} times the flat fiber Laplacian.
  ScalarField d2(f.grid_ptr());
  for (int a = n; a < n + q; ++a) {
    fft::derivative(pg, a, f.values(), flux.values());
    fft::derivative(pg, a, flux.values(), d2.values());
    for (std::size_t node = 0; node < pg.size(); ++node) {
      const std::size_t b = base_of(node, fsize);
      out[node] += std::exp(2.0 * phi[b] * inv_q) * d2[node];
    }
  }
  return out;
}

WarpedBlocks warped_ricci(const WarpedSpec& spec) {
  const GeometrySnapshot& base = spec.base();
  const double q = spec.q();
  const int n = base.dim();
  const ScalarField& psi = base.potential();

  SymTensorField horizontal = add(base.ricci(), hessian(base, psi));
  const auto dpsi = partials_of(psi);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto h = horizontal.component(horizontal.slot(i, j));
      for (std::size_t node = 0; node < base.grid().size(); ++node)
        h[node] -= dpsi[i][node] * dpsi[j][node] / q;
    }

  ScalarField lap = laplace_beltrami(base, psi);
  ScalarField grad_sq = base_grad_dot(base, psi, psi);
  ScalarField coeff(psi.grid_ptr());
  for (std::size_t node = 0; node < base.grid().size(); ++node)
    coeff[node] = (lap[node] - grad_sq[node]) / q;
  return WarpedBlocks{std::move(horizontal), std::move(coeff)};
}

ScalarField warped_scalar_curvature(const WarpedSpec& spec) {
  const GeometrySnapshot& base = spec.base();
  const double q = spec.q();
  const ScalarField& psi = base.potential();
  ScalarField lap = laplace_beltrami(base, psi);
  ScalarField grad_sq = base_grad_dot(base, psi, psi);
  const ScalarField& r = scalar_curvature(base);
  ScalarField out(psi.grid_ptr());
  for (std::size_t node = 0; node < base.grid().size(); ++node)
    out[node] = r[node] + 2.0 * lap[node] - (1.0 + 1.0 / q) * grad_sq[node];
  return out;
}

double integrate_warped(const WarpedSnapshot& ws, const ScalarField& f) {
  return integrate(f, *ws.product) / ws.fiber_volume;
}

ScalarField broadcast_to_product(const WarpedSnapshot& ws,
                                 const ScalarField& base_field) {
  require_same_grid(ws.base->grid(), base_field.grid(), "broadcast");
  const std::size_t fsize = ws.fiber->size();
  ScalarField out(ws.product->grid_ptr());
  for (std::size_t node = 0; node < out.grid().size(); ++node)
    out[node] = base_field[base_of(node, fsize)];
  return out;
}

ScalarField restrict_to_base(const WarpedSnapshot& ws,
                             const ScalarField& product_field) {
  require_same_grid(ws.product->grid(), product_field.grid(), "restrict");
  const std::size_t fsize = ws.fiber->size();
  ScalarField out(ws.base->grid_ptr());
  for (std::size_t b = 0; b < out.grid().size(); ++b)
    out[b] = product_field[b * fsize];
  return out;
}

bool fiber_constant(const WarpedSnapshot& ws, const ScalarField& f,
                    double tol) {
  require_same_grid(ws.product->grid(), f.grid(), "fiber_constant");
  const std::size_t fsize = ws.fiber->size();
  double scale = std::max(std::abs(f.min()), std::abs(f.max()));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    const std::size_t b = base_of(node, fsize);
    if (std::abs(f[node] - f[b * fsize]) > tol * scale) return false;
  }
  return true;
}

}  // namespace geoflow
