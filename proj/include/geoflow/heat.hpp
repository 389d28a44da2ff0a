#pragma once

#include <functional>
#include <vector>

#include "geoflow/schedule.hpp"
#include "geoflow/snapshot.hpp"

namespace geoflow {

/// One instant of a heat-flow run.
struct FlowState {
  double t;
  SnapshotPtr snapshot;
  ScalarField u;
};

struct FlowTrajectory {
  std::vector<FlowState> states;  // at the requested output times, ascending
  std::vector<double> masses;     // int u dmu at each output
  double dt_max = 0.0;            // largest internal step taken
  long total_steps = 0;
};

/// Geometry source for the solver: t -> snapshot.
using GeometryPath = std::function<SnapshotPtr(double)>;

struct HeatOptions {
  double safety = 0.2;          // dt <= safety * h_min^2 / max lambda(g^{-1})
  double positivity_tol = 1e-3; // relative undershoot treated as instability
  bool normalize_initial = true;
};

/// Largest stable explicit step on this geometry.
double stable_heat_dt(const GeometrySnapshot& snap, double safety);

/// One classical RK4 step of du/dt = L_{g(t),f(t)} u, geometry refreshed at
/// the substage times. Throws stability_error (advising a smaller dt) if the
/// solution dips below -positivity_tol * max|u|.
FlowState heat_step(const FlowState& state, double dt,
                    const GeometryPath& path, double positivity_tol = 1e-3);

FlowTrajectory evolve_heat(const MetricSchedule& schedule,
                           const ScalarField& u0,
                           const std::vector<double>& output_times,
                           const HeatOptions& options = {});

/// Same solver against an arbitrary geometry path (e.g. a Lott trajectory,
/// where mass is traded for the conjugate pairing instead of conserved).
FlowTrajectory evolve_heat_path(const GeometryPath& path, double t0,
                                const ScalarField& u0,
                                const std::vector<double>& output_times,
                                const HeatOptions& options = {});

/// Pointwise smallest eigenvalue of (1/2) dg/dt + Ric_{m,n}(L) + K g
/// relative to g(t). Pass m = infinity for the Ric(L) version.
ScalarField super_ricci_defect(const MetricSchedule& schedule, double m,
                               double K, double t);

/// Certified iff the defect minimum stays >= -1e-10 at every sampled time.
bool super_flow_certified(const MetricSchedule& schedule, double m, double K,
                          const std::vector<double>& times,
                          double tol = 1e-10);

/// u / int u dmu.
ScalarField normalize_mass(const ScalarField& u, const GeometrySnapshot& snap);

}  // namespace geoflow
