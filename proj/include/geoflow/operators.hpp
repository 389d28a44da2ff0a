#pragma once

#include "geoflow/field.hpp"
#include "geoflow/snapshot.hpp"

namespace geoflow {

/// Gamma^k_{ij} = (1/2) g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij}).
/// Validates positive-definiteness; throws geometry_error naming the node.
ChristoffelField christoffel(const SymTensorField& g);

/// (grad f)^i = g^{ij} d_j f.
VectorField gradient(const GeometrySnapshot& snap, const ScalarField& f);

/// Covariant Hessian: d_i d_j f - Gamma^k_{ij} d_k f.
SymTensorField hessian(const GeometrySnapshot& snap, const ScalarField& f);

/// Laplace-Beltrami as the g^{-1}-trace of the covariant Hessian.
ScalarField laplace_beltrami(const GeometrySnapshot& snap,
                             const ScalarField& f);

/// Witten Laplacian L f = Delta f - g(grad phi, grad f), evaluated in the
/// self-adjoint divergence form (1/rho) d_i(rho g^{ij} d_j f) with
/// rho = e^{-phi} sqrt(det g). Exactly antisymmetric differentiation makes
/// int (Lf) h dmu symmetric in (f,h) and int Lf dmu = 0 to rounding.
ScalarField witten_laplacian(const GeometrySnapshot& snap,
                             const ScalarField& f);

/// R_ij = d_k Gamma^k_ij - d_i Gamma^k_kj + Gamma^k_kl Gamma^l_ij
///        - Gamma^k_il Gamma^l_kj.
SymTensorField ricci_tensor(const SymTensorField& g);
ScalarField scalar_curvature(const GeometrySnapshot& snap);

/// Ric(L) = Ric + Hess(phi).
SymTensorField bakry_emery_tensor(const GeometrySnapshot& snap);

/// Ric_{m,n}(L) = Ric + Hess(phi) - (grad phi (x) grad phi) / (m - n),
/// with the covariant components d_i phi d_j phi. Requires m > dim.
SymTensorField bakry_emery_tensor_m(const GeometrySnapshot& snap, double m);

/// Pointwise squared g-norm g^{ik} g^{jl} T_ij T_kl (so |g|^2 = dim).
ScalarField tensor_norm_sq(const GeometrySnapshot& snap,
                           const SymTensorField& t);

/// Pointwise g-inner product <A,B> = g^{ik} g^{jl} A_ij B_kl.
ScalarField tensor_dot(const GeometrySnapshot& snap, const SymTensorField& a,
                       const SymTensorField& b);

/// Pointwise smallest eigenvalue of T relative to g (T v = lambda g v).
ScalarField min_relative_eigenvalue(const GeometrySnapshot& snap,
                                    const SymTensorField& t);

/// T_ij v^i w^j for contravariant v, w.
ScalarField quadratic_form(const SymTensorField& t, const VectorField& v,
                           const VectorField& w);

/// int f dmu: trapezoid rule on the periodic grid against the weighted
/// measure, summed in fixed node order.
double integrate(const ScalarField& f, const GeometrySnapshot& snap);

/// int f h dmu.
double inner_mu(const ScalarField& f, const ScalarField& h,
                const GeometrySnapshot& snap);

}  // namespace geoflow
