#pragma once

#include <memory>
#include <mutex>

#include "geoflow/field.hpp"

namespace geoflow {

/// One instant of weighted geometry: metric g, potential phi, and derived
/// quantities. The metric is validated positive-definite at construction
/// (per-node smallest eigenvalue > 1e-12; failure is a hard error).
///
/// Inverse metric, sqrt(det g) and the measure density e^{-phi} sqrt(det g)
/// are computed eagerly; Christoffel symbols and curvature on first use.
/// Instances are immutable and safe to share across threads.
class GeometrySnapshot {
 public:
  GeometrySnapshot(SymTensorField metric, ScalarField potential);

  const Grid& grid() const { return metric_.grid(); }
  const GridPtr& grid_ptr() const { return metric_.grid_ptr(); }
  int dim() const { return metric_.dim(); }

  const SymTensorField& metric() const { return metric_; }
  const ScalarField& potential() const { return potential_; }
  const SymTensorField& inverse_metric() const { return inverse_metric_; }
  const ScalarField& sqrt_det_metric() const { return sqrt_det_; }
  /// e^{-phi} sqrt(det g): density of dmu against the coordinate measure.
  const ScalarField& measure_density() const { return measure_density_; }

  const ChristoffelField& christoffel() const;
  const SymTensorField& ricci() const;
  const ScalarField& scalar_curvature() const;

 private:
  SymTensorField metric_;
  ScalarField potential_;
  SymTensorField inverse_metric_;
  ScalarField sqrt_det_;
  ScalarField measure_density_;

  mutable std::once_flag christoffel_once_;
  mutable std::unique_ptr<ChristoffelField> christoffel_;
  mutable std::once_flag curvature_once_;
  mutable std::unique_ptr<SymTensorField> ricci_;
  mutable std::unique_ptr<ScalarField> scalar_curvature_;
};

using SnapshotPtr = std::shared_ptr<const GeometrySnapshot>;

SnapshotPtr make_snapshot(SymTensorField metric, ScalarField potential);
/// Flat metric, zero potential.
SnapshotPtr make_flat_snapshot(GridPtr grid);

}  // namespace geoflow
