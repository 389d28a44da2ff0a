#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "geoflow/snapshot.hpp"

namespace geoflow {

/// Time-parameterized family t -> (g(t), f(t)) on [t0, T]. The potential is
/// the conjugate-equation integral f(t) = f0 + (1/2) log(det g(t)/det g(t0)),
/// which makes the weighted measure density e^{-f} sqrt(det g) exactly
/// time-independent.
class MetricSchedule {
 public:
  using MetricFn = std::function<SymTensorField(double)>;

  MetricSchedule(GridPtr grid, MetricFn metric, std::optional<MetricFn> rate,
                 ScalarField f0, double t_begin, double t_end);

  /// Frozen geometry; rate is identically zero.
  static MetricSchedule fixed(SnapshotPtr snap, double t_begin, double t_end);

  /// g(t) = s(t) * g0 with analytic scale factor.
  static MetricSchedule scaled(SymTensorField g0, ScalarField f0,
                               std::function<double(double)> s,
                               std::function<double(double)> s_rate,
                               double t_begin, double t_end);

  const GridPtr& grid() const { return grid_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  bool is_static() const { return is_static_; }

  SymTensorField metric_at(double t) const;
  /// Analytic when provided, else centered differences with
  /// delta = 1e-4 (T - t0) (one-sided at the interval ends).
  SymTensorField metric_rate_at(double t) const;
  ScalarField conjugate_potential(double t) const;
  SnapshotPtr snapshot_at(double t) const;

 private:
  void check_time(double t) const;

  GridPtr grid_;
  MetricFn metric_;
  std::optional<MetricFn> rate_;
  ScalarField f0_;
  double t_begin_;
  double t_end_;
  ScalarField log_det_begin_;
  bool is_static_ = false;
  SnapshotPtr static_snapshot_;
};

}  // namespace geoflow
