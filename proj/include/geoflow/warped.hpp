#pragma once

#include "geoflow/field.hpp"
#include "geoflow/snapshot.hpp"

namespace geoflow {

/// Warped product data: base (M, g, phi) of dimension n and a flat torus
/// fiber of dimension q, carrying the metric g_base (+) e^{-2 phi/q} g_N.
/// The fiber measure is normalized to total mass 1 (integrals divide by the
/// coordinate fiber volume), so dvol = dmu (x) dnu_N.
///
/// A fiber grid is needed only for direct product assembly; the closed-form
/// block operations accept any real q > 0 without one.
class WarpedSpec {
 public:
  /// Integer fiber dimension with an explicit fiber grid (q = fiber dim).
  WarpedSpec(SnapshotPtr base, GridPtr fiber);
  /// Closed-form-only spec with real q > 0.
  WarpedSpec(SnapshotPtr base, double q);

  const GeometrySnapshot& base() const { return *base_; }
  const SnapshotPtr& base_ptr() const { return base_; }
  const GridPtr& fiber() const { return fiber_; }  // may be null
  bool has_fiber() const { return fiber_ != nullptr; }
  double q() const { return q_; }
  int n() const { return base_->dim(); }

 private:
  SnapshotPtr base_;
  GridPtr fiber_;
  double q_;
};

/// Assembled product geometry. The snapshot's potential is zero: the warp
/// already carries e^{-phi} inside sqrt(det g~).
struct WarpedSnapshot {
  SnapshotPtr product;   // dim n+q, base axes first
  SnapshotPtr base;
  GridPtr fiber;
  double fiber_volume;   // coordinate volume of the fiber torus
  int n;
  int q;
};

/// Closed-form blocks of a symmetric 2-tensor on the product: a horizontal
/// base-indexed block plus a fiber block fiber_coeff * g~_{alpha beta}
/// (mixed blocks vanish for every tensor produced here).
struct WarpedBlocks {
  SymTensorField horizontal;  // on the base grid
  ScalarField fiber_coeff;    // multiplies the warped fiber metric
};

/// Pointwise split of |Hess~ f - g~/2t|^2 into base and fiber parts.
struct HessianNormSplit {
  ScalarField total;       // horizontal + vertical (exact identity)
  ScalarField horizontal;  // |Hess f - g/2t|^2 on the base
  ScalarField vertical;    // (1/q) (grad phi . grad f + q/2t)^2
};

WarpedSnapshot build_warped(const WarpedSpec& spec);

/// All Christoffel blocks of the warped metric on the product grid:
/// base block Gamma^k_ij, fiber block Gamma^k_{ab} = q^{-1} g^{kl} d_l phi
/// g~_{ab}, and the mixed block Gamma^b_{ia} = -(d_i phi / q) delta^b_a
/// from differentiating the warp factor. Must agree with christoffel() of
/// the assembled metric.
ChristoffelField warped_christoffel(const WarpedSpec& spec);

/// Hessian of a base-only function: horizontal block = base Hessian,
/// fiber block = -(grad phi . grad f / q) g~_{ab}, mixed block zero.
WarpedBlocks warped_hessian_blocks(const WarpedSpec& spec,
                                   const ScalarField& f);

/// Same block identity in the Section-5 notation (Hess~ v for base-only v).
WarpedBlocks warped_hessian_of(const WarpedSpec& spec, const ScalarField& v);

HessianNormSplit hessian_norm_split(const WarpedSpec& spec,
                                    const ScalarField& f, double t);

/// Laplace-Beltrami of the warped metric via the split
/// Delta~ = L + e^{+2 phi/q} Delta_fiber, for any f on the product grid.
ScalarField warped_laplacian(const WarpedSnapshot& ws, const ScalarField& f);

/// Ricci blocks of the warped metric: horizontal = Ric + Hess psi
/// - (1/q) grad psi (x) grad psi, fiber coefficient (1/q)(Delta psi
/// - |grad psi|^2) on g~_{ab}.
WarpedBlocks warped_ricci(const WarpedSpec& spec);

/// R_q = R + 2 Delta psi - (1 + 1/q) |grad psi|^2 on the base.
ScalarField warped_scalar_curvature(const WarpedSpec& spec);

/// Integral over the product with the normalized fiber measure.
double integrate_warped(const WarpedSnapshot& ws, const ScalarField& f);

/// Base-only field extended fiber-constant to the product grid.
ScalarField broadcast_to_product(const WarpedSnapshot& ws,
                                 const ScalarField& base_field);
/// Restriction to the fiber-origin slice.
ScalarField restrict_to_base(const WarpedSnapshot& ws,
                             const ScalarField& product_field);
/// True if the field is constant along fiber directions (to tolerance).
bool fiber_constant(const WarpedSnapshot& ws, const ScalarField& f,
                    double tol = 1e-12);

}  // namespace geoflow
