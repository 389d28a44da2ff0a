#include "geoflow/snapshot.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/linalg_small.hpp"
#include "geoflow/operators.hpp"

namespace geoflow {

GeometrySnapshot::GeometrySnapshot(SymTensorField metric, ScalarField potential)
    : metric_(std::move(metric)),
      potential_(std::move(potential)),
      inverse_metric_(metric_.grid_ptr()),
      sqrt_det_(metric_.grid_ptr()),
      measure_density_(metric_.grid_ptr()) {
  require_same_grid(metric_.grid(), potential_.grid(), "snapshot");
  if (!metric_.all_finite() || !potential_.all_finite())
    throw input_error("snapshot: non-finite metric or potential");

  const Grid& g = metric_.grid();
  const int n = g.dim();
  double packed[6], inv[6];
  for (std::size_t node = 0; node < g.size(); ++node) {
    metric_.pack(node, packed);
    const double eig_min = linalg::sym_eigen_min(packed, n);
    if (!(eig_min > 1e-12)) {
      const auto idx = g.unravel(node);
      std::ostringstream os;
      os << "metric not positive-definite at node " << node << " (index";
      for (int a = 0; a < n; ++a) os << ' ' << idx[a];
      os << "): smallest eigenvalue " << eig_min;
      throw geometry_error(os.str());
    }
    linalg::sym_inverse(packed, n, inv);
    for (int s = 0; s < metric_.slots(); ++s)
      inverse_metric_.component(s)[node] = inv[s];
    const double det = linalg::sym_det(packed, n);
    sqrt_det_[node] = std::sqrt(det);
    measure_density_[node] = std::exp(-potential_[node]) * sqrt_det_[node];
  }
}

const ChristoffelField& GeometrySnapshot::christoffel() const {
  std::call_once(christoffel_once_, [this] {
    christoffel_ =
        std::make_unique<ChristoffelField>(geoflow::christoffel(metric_));
  });
  return *christoffel_;
}

const SymTensorField& GeometrySnapshot::ricci() const {
  std::call_once(curvature_once_, [this] {
    ricci_ = std::make_unique<SymTensorField>(ricci_tensor(metric_));
    auto scal = std::make_unique<ScalarField>(grid_ptr());
    const int n = dim();
    for (std::size_t node = 0; node < grid().size(); ++node) {
      double r = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          r += inverse_metric_(i, j, node) * (*ricci_)(i, j, node);
      (*scal)[node] = r;
    }
    scalar_curvature_ = std::move(scal);
  });
  return *ricci_;
}

const ScalarField& GeometrySnapshot::scalar_curvature() const {
  ricci();
  return *scalar_curvature_;
}

SnapshotPtr make_snapshot(SymTensorField metric, ScalarField potential) {
  return std::make_shared<GeometrySnapshot>(std::move(metric),
                                            std::move(potential));
}

SnapshotPtr make_flat_snapshot(GridPtr grid) {
  SymTensorField metric = SymTensorField::identity(grid);
  ScalarField potential(grid);
  return make_snapshot(std::move(metric), std::move(potential));
}

}  // namespace geoflow
