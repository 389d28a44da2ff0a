#include "geoflow/operators.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/linalg_small.hpp"

namespace geoflow {

namespace {

void unpack_sym(const double* a, int n, double m[3][3]) {
  int s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m[i][j] = a[s];
      m[j][i] = a[s];
      ++s;
    }
}

// First partials of every component of a symmetric tensor field:
// out[k][slot] = d_k T_{slot}.
std::vector<std::vector<ScalarField>> tensor_partials(const SymTensorField& t) {
  const int n = t.dim();
  std::vector<std::vector<ScalarField>> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    std::vector<ScalarField> row;
    row.reserve(t.slots());
    for (int s = 0; s < t.slots(); ++s) {
      ScalarField d(t.grid_ptr());
      fft::derivative(t.grid(), k, t.component(s), d.values());
      row.push_back(std::move(d));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ScalarField> partials(const ScalarField& f) {
  const int n = f.grid().dim();
  std::vector<ScalarField> out;
  out.reserve(n);
  for (int a = 0; a < n; ++a) out.push_back(spectral_derivative(f, a));
  return out;
}

}  // namespace

ChristoffelField christoffel(const SymTensorField& g) {
  const Grid& grid = g.grid();
  const int n = g.dim();
  if (!g.all_finite()) throw input_error("christoffel: non-finite metric");

  const auto dg = tensor_partials(g);
  ChristoffelField out(g.grid_ptr());

  double packed[6], inv[6];
  for (std::size_t node = 0; node < grid.size(); ++node) {
    g.pack(node, packed);
    const double eig_min = linalg::sym_eigen_min(packed, n);
    if (!(eig_min > 1e-12)) {
      std::ostringstream os;
      os << "christoffel: metric not positive-definite at node " << node
         << " (smallest eigenvalue " << eig_min << ")";
      throw geometry_error(os.str());
    }
    linalg::sym_inverse(packed, n, inv);
    double ginv[3][3];
    unpack_sym(inv, n, ginv);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double sum = 0.0;
          for (int l = 0; l < n; ++l) {
            const double term = dg[i][g.slot(j, l)][node] +
                                dg[j][g.slot(i, l)][node] -
                                dg[l][g.slot(i, j)][node];
            sum += ginv[k][l] * term;
          }
          out.at(k, i, j, node) = 0.5 * sum;
        }
      }
    }
  }
  return out;
}

VectorField gradient(const GeometrySnapshot& snap, const ScalarField& f) {
  require_same_grid(snap.grid(), f.grid(), "gradient");
  const int n = snap.dim();
  const auto df = partials(f);
  VectorField out(f.grid_ptr());
  const auto& ginv = snap.inverse_metric();
  for (int i = 0; i < n; ++i) {
    auto oi = out.component(i);
    for (std::size_t node = 0; node < f.grid().size(); ++node) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += ginv(i, j, node) * df[j][node];
      oi[node] = sum;
    }
  }
  return out;
}

SymTensorField hessian(const GeometrySnapshot& snap, const ScalarField& f) {
  require_same_grid(snap.grid(), f.grid(), "hessian");
  const int n = snap.dim();
  const auto df = partials(f);
  const auto& gamma = snap.christoffel();
  SymTensorField out(f.grid_ptr());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ScalarField dij(f.grid_ptr());
      fft::derivative(f.grid(), i, df[j].values(), dij.values());
      auto o = out.component(out.slot(i, j));
      for (std::size_t node = 0; node < f.grid().size(); ++node) {
        double corr = 0.0;
        for (int k = 0; k < n; ++k) corr += gamma(k, i, j, node) * df[k][node];
        o[node] = dij[node] - corr;
      }
    }
  }
  return out;
}

ScalarField laplace_beltrami(const GeometrySnapshot& snap,
                             const ScalarField& f) {
  const SymTensorField h = hessian(snap, f);
  const int n = snap.dim();
  const auto& ginv = snap.inverse_metric();
  ScalarField out(f.grid_ptr());
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sum += ginv(i, j, node) * h(i, j, node);
    out[node] = sum;
  }
  return out;
}

ScalarField witten_laplacian(const GeometrySnapshot& snap,
                             const ScalarField& f) {
  require_same_grid(snap.grid(), f.grid(), "witten_laplacian");
  if (!f.all_finite()) throw input_error("witten_laplacian: non-finite input");
  const int n = snap.dim();
  const Grid& grid = f.grid();
  const auto df = partials(f);
  const auto& ginv = snap.inverse_metric();
  const auto& rho = snap.measure_density();

  ScalarField out(f.grid_ptr());
  ScalarField flux(f.grid_ptr());
  ScalarField dflux(f.grid_ptr());
  for (int i = 0; i < n; ++i) {
    for (std::size_t node = 0; node < grid.size(); ++node) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += ginv(i, j, node) * df[j][node];
      flux[node] = rho[node] * sum;
    }
    fft::derivative(grid, i, flux.values(), dflux.values());
    for (std::size_t node = 0; node < grid.size(); ++node)
      out[node] += dflux[node];
  }
  for (std::size_t node = 0; node < grid.size(); ++node) out[node] /= rho[node];
  return out;
}

SymTensorField ricci_tensor(const SymTensorField& g) {
  const Grid& grid = g.grid();
  const int n = g.dim();
  SymTensorField out(g.grid_ptr());
  if (n == 1) return out;  // no intrinsic curvature in dimension 1

  const ChristoffelField gamma = christoffel(g);

  // d_k Gamma^k_{ij} for every lower slot.
  std::vector<ScalarField> div_gamma;  // indexed by slot(i,j)
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ScalarField sum(g.grid_ptr());
      ScalarField d(g.grid_ptr());
      for (int k = 0; k < n; ++k) {
        fft::derivative(grid, k, gamma.component(k, i, j), d.values());
        for (std::size_t node = 0; node < grid.size(); ++node)
          sum[node] += d[node];
      }
      div_gamma.push_back(std::move(sum));
    }
  }

  // Contractions C_j = Gamma^k_{kj}.
  std::vector<ScalarField> contr;
  for (int j = 0; j < n; ++j) {
    ScalarField c(g.grid_ptr());
    for (int k = 0; k < n; ++k) {
      auto gk = gamma.component(k, k, j);
      for (std::size_t node = 0; node < grid.size(); ++node)
        c[node] += gk[node];
    }
    contr.push_back(std::move(c));
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ScalarField di_cj(g.grid_ptr());
      fft::derivative(grid, i, contr[j].values(), di_cj.values());
      auto o = out.component(out.slot(i, j));
      const auto& dg = div_gamma[out.slot(i, j)];
      for (std::size_t node = 0; node < grid.size(); ++node) {
        double quad = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            quad += gamma(k, k, l, node) * gamma(l, i, j, node) -
                    gamma(k, i, l, node) * gamma(l, k, j, node);
        o[node] = dg[node] - di_cj[node] + quad;
      }
    }
  }
  return out;
}

ScalarField scalar_curvature(const GeometrySnapshot& snap) {
  snap.ricci();
  return snap.scalar_curvature();
}

SymTensorField bakry_emery_tensor(const GeometrySnapshot& snap) {
  return add(snap.ricci(), hessian(snap, snap.potential()));
}

SymTensorField bakry_emery_tensor_m(const GeometrySnapshot& snap, double m) {
  const int n = snap.dim();
  if (!(m > n)) {
    std::ostringstream os;
    os << "bakry_emery_tensor_m: m = " << m << " must exceed dim = " << n
       << " (the 1/(m-n) term is singular)";
    throw parameter_error(os.str());
  }
  SymTensorField out = bakry_emery_tensor(snap);
  const auto dphi = [&] {
    std::vector<ScalarField> d;
    for (int a = 0; a < n; ++a)
      d.push_back(spectral_derivative(snap.potential(), a));
    return d;
  }();
  const double inv_mn = 1.0 / (m - n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto o = out.component(out.slot(i, j));
      for (std::size_t node = 0; node < snap.grid().size(); ++node)
        o[node] -= inv_mn * dphi[i][node] * dphi[j][node];
    }
  return out;
}

ScalarField tensor_dot(const GeometrySnapshot& snap, const SymTensorField& a,
                       const SymTensorField& b) {
  require_same_grid(snap.grid(), a.grid(), "tensor_dot");
  require_same_grid(snap.grid(), b.grid(), "tensor_dot");
  const int n = snap.dim();
  const auto& ginv = snap.inverse_metric();
  ScalarField out(a.grid_ptr());
  for (std::size_t node = 0; node < a.grid().size(); ++node) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            sum += ginv(i, k, node) * ginv(j, l, node) * a(i, j, node) *
                   b(k, l, node);
    out[node] = sum;
  }
  return out;
}

ScalarField tensor_norm_sq(const GeometrySnapshot& snap,
                           const SymTensorField& t) {
  return tensor_dot(snap, t, t);
}

ScalarField min_relative_eigenvalue(const GeometrySnapshot& snap,
                                    const SymTensorField& t) {
  require_same_grid(snap.grid(), t.grid(), "min_relative_eigenvalue");
  const int n = snap.dim();
  ScalarField out(t.grid_ptr());
  double tp[6], gp[6];
  for (std::size_t node = 0; node < t.grid().size(); ++node) {
    t.pack(node, tp);
    snap.metric().pack(node, gp);
    out[node] = linalg::rel_eigen_min(tp, gp, n);
  }
  return out;
}

ScalarField quadratic_form(const SymTensorField& t, const VectorField& v,
                           const VectorField& w) {
  require_same_grid(t.grid(), v.grid(), "quadratic_form");
  require_same_grid(t.grid(), w.grid(), "quadratic_form");
  const int n = t.dim();
  ScalarField out(t.grid_ptr());
  for (std::size_t node = 0; node < t.grid().size(); ++node) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        sum += t(i, j, node) * v(i, node) * w(j, node);
    out[node] = sum;
  }
  return out;
}

double integrate(const ScalarField& f, const GeometrySnapshot& snap) {
  require_same_grid(snap.grid(), f.grid(), "integrate");
  if (!f.all_finite()) throw input_error("integrate: non-finite integrand");
  const auto& rho = snap.measure_density();
  long double acc = 0.0L;
  for (std::size_t node = 0; node < f.grid().size(); ++node)
    acc += static_cast<long double>(f[node]) * rho[node];
  return static_cast<double>(acc * f.grid().cell_volume());
}

double inner_mu(const ScalarField& f, const ScalarField& h,
                const GeometrySnapshot& snap) {
  require_same_grid(f.grid(), h.grid(), "inner_mu");
  const auto& rho = snap.measure_density();
  long double acc = 0.0L;
  for (std::size_t node = 0; node < f.grid().size(); ++node)
    acc += static_cast<long double>(f[node]) * h[node] * rho[node];
  return static_cast<double>(acc * f.grid().cell_volume());
}

}  // namespace geoflow
