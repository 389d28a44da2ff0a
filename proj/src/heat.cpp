#include "geoflow/heat.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/linalg_small.hpp"
#include "geoflow/operators.hpp"

namespace geoflow {

double stable_heat_dt(const GeometrySnapshot& snap, double safety) {
  const Grid& g = snap.grid();
  double h_min = g.spacing(0);
  for (int a = 1; a < g.dim(); ++a) h_min = std::min(h_min, g.spacing(a));
  // lambda_max(g^{-1}) = 1 / lambda_min(g)
  double packed[6];
  double lam_max = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    snap.metric().pack(node, packed);
    lam_max = std::max(lam_max, 1.0 / linalg::sym_eigen_min(packed, g.dim()));
  }
  return safety * h_min * h_min / lam_max;
}

namespace {

void check_positivity(const ScalarField& u, double tol, double dt) {
  double lo = u.min();
  double hi = std::max(std::abs(u.max()), std::abs(lo));
  if (hi == 0.0 || !std::isfinite(lo) || !std::isfinite(hi) ||
      lo < -tol * hi) {
    std::ostringstream os;
    os << "heat step lost positivity (min u = " << lo << ", max |u| = " << hi
       << "); retry with a smaller dt than " << dt;
    throw stability_error(os.str());
  }
}

}  // namespace

FlowState heat_step(const FlowState& state, double dt, const GeometryPath& path,
                    double positivity_tol) {
  const double t = state.t;
  SnapshotPtr s_half = path(t + 0.5 * dt);
  SnapshotPtr s_full = path(t + dt);

  ScalarField k1 = witten_laplacian(*state.snapshot, state.u);

  ScalarField stage = state.u;
  axpy(0.5 * dt, k1, stage);
  ScalarField k2 = witten_laplacian(*s_half, stage);

  stage = state.u;
  axpy(0.5 * dt, k2, stage);
  ScalarField k3 = witten_laplacian(*s_half, stage);

  stage = state.u;
  axpy(dt, k3, stage);
  ScalarField k4 = witten_laplacian(*s_full, stage);

  ScalarField u_next = state.u;
  axpy(dt / 6.0, k1, u_next);
  axpy(dt / 3.0, k2, u_next);
  axpy(dt / 3.0, k3, u_next);
  axpy(dt / 6.0, k4, u_next);

  check_positivity(u_next, positivity_tol, dt);
  return FlowState{t + dt, std::move(s_full), std::move(u_next)};
}

namespace {

FlowTrajectory run_heat(const GeometryPath& path, double t0,
                        const ScalarField& u0,
                        const std::vector<double>& output_times,
                        const HeatOptions& options) {
  if (output_times.empty())
    throw input_error("evolve_heat: no output times requested");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < t0 - 1e-15)
      throw input_error("evolve_heat: output time precedes t0");
    if (i > 0 && output_times[i] <= output_times[i - 1])
      throw input_error("evolve_heat: output times must be increasing");
  }
  SnapshotPtr snap0 = path(t0);
  if (!(u0.min() > 0.0))
    throw input_error("evolve_heat: initial data must be positive");

  ScalarField u = options.normalize_initial ? normalize_mass(u0, *snap0) : u0;

  FlowTrajectory traj;
  FlowState state{t0, snap0, std::move(u)};
  for (double t_out : output_times) {
    double gap = t_out - state.t;
    if (gap > 0.0) {
      const double dt_stable =
          stable_heat_dt(*state.snapshot, options.safety);
      const long steps = std::max<long>(1, (long)std::ceil(gap / dt_stable));
      const double dt = gap / steps;
      traj.dt_max = std::max(traj.dt_max, dt);
      for (long s = 0; s < steps; ++s) {
        // land exactly on t_out regardless of rounding
        const double target = (s + 1 == steps) ? t_out : state.t + dt;
        state = heat_step(state, target - state.t, path,
                          options.positivity_tol);
        state.t = target;
        fft::zero_nyquist(state.u.grid(), state.u.values());
      }
      traj.total_steps += steps;
    }
    traj.masses.push_back(integrate(state.u, *state.snapshot));
    traj.states.push_back(state);
  }
  return traj;
}

}  // namespace

FlowTrajectory evolve_heat(const MetricSchedule& schedule,
                           const ScalarField& u0,
                           const std::vector<double>& output_times,
                           const HeatOptions& options) {
  if (!output_times.empty() &&
      output_times.back() > schedule.t_end() + 1e-12)
    throw parameter_error("evolve_heat: output beyond schedule interval");
  GeometryPath path = [&schedule](double t) { return schedule.snapshot_at(t); };
  return run_heat(path, schedule.t_begin(), u0, output_times, options);
}

FlowTrajectory evolve_heat_path(const GeometryPath& path, double t0,
                                const ScalarField& u0,
                                const std::vector<double>& output_times,
                                const HeatOptions& options) {
  return run_heat(path, t0, u0, output_times, options);
}

ScalarField super_ricci_defect(const MetricSchedule& schedule, double m,
                               double K, double t) {
  if (K < 0.0) throw parameter_error("super_ricci_defect: K must be >= 0");
  SnapshotPtr snap = schedule.snapshot_at(t);
  SymTensorField s = schedule.metric_rate_at(t);
  for (int c = 0; c < s.slots(); ++c) {
    auto sc = s.component(c);
    for (auto& v : sc) v *= 0.5;
  }
  SymTensorField curv = std::isinf(m) ? bakry_emery_tensor(*snap)
                                      : bakry_emery_tensor_m(*snap, m);
  SymTensorField total = add(s, curv);
  if (K != 0.0) axpy(K, snap->metric(), total);
  return min_relative_eigenvalue(*snap, total);
}

bool super_flow_certified(const MetricSchedule& schedule, double m, double K,
                          const std::vector<double>& times, double tol) {
  for (double t : times) {
    ScalarField defect = super_ricci_defect(schedule, m, K, t);
    if (defect.min() < -tol) return false;
  }
  return true;
}

ScalarField normalize_mass(const ScalarField& u, const GeometrySnapshot& snap) {
  const double mass = integrate(u, snap);
  if (!(mass > 0.0))
    throw input_error("normalize_mass: non-positive total mass");
  return (1.0 / mass) * u;
}

}  // namespace geoflow
