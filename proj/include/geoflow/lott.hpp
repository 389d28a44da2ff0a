#pragma once

#include <utility>
#include <vector>

#include "geoflow/heat.hpp"
#include "geoflow/snapshot.hpp"

namespace geoflow {

/// State of the coupled system dg/dt = -2 Ric_psi^q,
/// dpsi/dt = Delta psi - |grad psi|^2 (the base-side form of the Ricci flow
/// of the warped product metric).
struct LottState {
  double t;
  SymTensorField g;
  ScalarField psi;
};

struct LottRates {
  SymTensorField dg;
  ScalarField dpsi;
};

LottRates lott_rates(const LottState& state, double q);

/// One RK4 step; curvature is recomputed at each substage. Throws
/// stability_error if the metric loses positive-definiteness.
LottState lott_flow_step(const LottState& state, double dt, double q);

/// Densely stored flow with 4-point Lagrange interpolation in time.
class LottTrajectory {
 public:
  LottTrajectory(std::vector<LottState> states, double q);

  const std::vector<LottState>& states() const { return states_; }
  double t_begin() const { return states_.front().t; }
  double t_end() const { return states_.back().t; }
  double q() const { return q_; }
  const GridPtr& grid() const { return states_.front().g.grid_ptr(); }

  SymTensorField metric_at(double t) const;
  ScalarField psi_at(double t) const;
  SnapshotPtr snapshot_at(double t) const;
  /// R_q = R + 2 Delta psi - (1 + 1/q)|grad psi|^2 at time t.
  ScalarField rq_at(double t) const;

 private:
  void weights(double t, std::size_t* idx, double* w) const;
  std::vector<LottState> states_;
  double q_;
};

LottTrajectory evolve_lott(LottState initial, double q, double t_end,
                           double safety = 0.2);

/// phi along the backward conjugate equation d_t phi = -L phi + R_q phi,
/// integrated in tau = T - t from tau_start with the stored geometry.
struct ConjugateState {
  double tau;
  double t;
  ScalarField phi;
  SnapshotPtr snapshot;
};

struct ConjugateTrajectory {
  std::vector<ConjugateState> states;  // ascending tau
  double q = 0.0;
};

ConjugateTrajectory conjugate_heat_solve(const LottTrajectory& traj,
                                         const ScalarField& phi_terminal,
                                         double tau_start,
                                         const std::vector<double>& output_taus,
                                         const HeatOptions& options = {});

/// eta = -log phi - ((n+q)/2) log(4 pi tau).
ScalarField eta_from_phi(const ScalarField& phi, double tau, int n, double q);
ScalarField phi_from_eta(const ScalarField& eta, double tau, int n, double q);

/// Direct Ricci flow dg/dt = -2 Ric(g) on an already-assembled metric;
/// the cross-check for the coupled base-side system.
std::vector<std::pair<double, SymTensorField>> evolve_ricci_flow(
    SymTensorField g0, double t0, const std::vector<double>& output_times,
    double safety = 0.1);

}  // namespace geoflow
