#include "geoflow/lott.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/operators.hpp"
#include "geoflow/warped.hpp"

namespace geoflow {

namespace {

ScalarField grad_norm_sq(const GeometrySnapshot& snap, const ScalarField& f) {
  const int n = snap.dim();
  std::vector<ScalarField> df;
  for (int a = 0; a < n; ++a) df.push_back(spectral_derivative(f, a));
  const auto& ginv = snap.inverse_metric();
  ScalarField out(f.grid_ptr());
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += ginv(i, j, node) * df[i][node] * df[j][node];
    out[node] = s;
  }
  return out;
}

SnapshotPtr snapshot_or_singular(const SymTensorField& g,
                                 const ScalarField& psi, double t) {
  try {
    return make_snapshot(g, psi);
  } catch (const geometry_error& e) {
    std::ostringstream os;
    os << "flow singularity at t = " << t << ": " << e.what();
    throw stability_error(os.str());
  }
}

}  // namespace

LottRates lott_rates(const LottState& state, double q) {
  SnapshotPtr snap = snapshot_or_singular(state.g, state.psi, state.t);
  WarpedSpec spec(snap, q);
  WarpedBlocks ric = warped_ricci(spec);
  LottRates rates{scaled(ric.horizontal, -2.0), ScalarField(state.psi.grid_ptr())};
  ScalarField lap = laplace_beltrami(*snap, state.psi);
  ScalarField gsq = grad_norm_sq(*snap, state.psi);
  for (std::size_t node = 0; node < state.psi.grid().size(); ++node)
    rates.dpsi[node] = lap[node] - gsq[node];
  return rates;
}

LottState lott_flow_step(const LottState& state, double dt, double q) {
  const double t = state.t;
  LottRates k1 = lott_rates(state, q);

  LottState stage{t + 0.5 * dt, state.g, state.psi};
  axpy(0.5 * dt, k1.dg, stage.g);
  axpy(0.5 * dt, k1.dpsi, stage.psi);
  LottRates k2 = lott_rates(stage, q);

  stage = LottState{t + 0.5 * dt, state.g, state.psi};
  axpy(0.5 * dt, k2.dg, stage.g);
  axpy(0.5 * dt, k2.dpsi, stage.psi);
  LottRates k3 = lott_rates(stage, q);

  stage = LottState{t + dt, state.g, state.psi};
  axpy(dt, k3.dg, stage.g);
  axpy(dt, k3.dpsi, stage.psi);
  LottRates k4 = lott_rates(stage, q);

  LottState next{t + dt, state.g, state.psi};
  axpy(dt / 6.0, k1.dg, next.g);
  axpy(dt / 3.0, k2.dg, next.g);
  axpy(dt / 3.0, k3.dg, next.g);
  axpy(dt / 6.0, k4.dg, next.g);
  axpy(dt / 6.0, k1.dpsi, next.psi);
  axpy(dt / 3.0, k2.dpsi, next.psi);
  axpy(dt / 3.0, k3.dpsi, next.psi);
  axpy(dt / 6.0, k4.dpsi, next.psi);
  return next;
}

LottTrajectory::LottTrajectory(std::vector<LottState> states, double q)
    : states_(std::move(states)), q_(q) {
  if (states_.size() < 4)
    throw input_error("lott trajectory needs at least 4 stored states");
}

void LottTrajectory::weights(double t, std::size_t* idx, double* w) const {
  const auto& st = states_;
  const double lo = st.front().t, hi = st.back().t;
  if (t < lo - 1e-9 * (hi - lo) || t > hi + 1e-9 * (hi - lo))
    throw parameter_error("lott trajectory: time outside stored range");
  // first state with time >= t
  std::size_t j =
      std::lower_bound(st.begin(), st.end(), t,
                       [](const LottState& s, double x) { return s.t < x; }) -
      st.begin();
  std::size_t start = (j < 2) ? 0 : j - 2;
  start = std::min(start, st.size() - 4);
  for (int a = 0; a < 4; ++a) idx[a] = start + a;
  for (int a = 0; a < 4; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      num *= t - st[idx[b]].t;
      den *= st[idx[a]].t - st[idx[b]].t;
    }
    w[a] = num / den;
  }
}

SymTensorField LottTrajectory::metric_at(double t) const {
  std::size_t idx[4];
  double w[4];
  weights(t, idx, w);
  SymTensorField out = scaled(states_[idx[0]].g, w[0]);
  for (int a = 1; a < 4; ++a) axpy(w[a], states_[idx[a]].g, out);
  return out;
}

ScalarField LottTrajectory::psi_at(double t) const {
  std::size_t idx[4];
  double w[4];
  weights(t, idx, w);
  ScalarField out = w[0] * states_[idx[0]].psi;
  for (int a = 1; a < 4; ++a) axpy(w[a], states_[idx[a]].psi, out);
  return out;
}

SnapshotPtr LottTrajectory::snapshot_at(double t) const {
  return make_snapshot(metric_at(t), psi_at(t));
}

ScalarField LottTrajectory::rq_at(double t) const {
  return warped_scalar_curvature(WarpedSpec(snapshot_at(t), q_));
}

LottTrajectory evolve_lott(LottState initial, double q, double t_end,
                           double safety) {
  if (!(t_end > initial.t))
    throw parameter_error("evolve_lott: t_end must exceed the initial time");
  std::vector<LottState> states;
  states.push_back(initial);
  LottState state = std::move(initial);
  while (state.t < t_end - 1e-14 * (t_end - states.front().t)) {
    SnapshotPtr snap = snapshot_or_singular(state.g, state.psi, state.t);
    double dt = stable_heat_dt(*snap, safety);
    dt = std::min(dt, t_end - state.t);
    state = lott_flow_step(state, dt, q);
    states.push_back(state);
  }
  states.back().t = t_end;
  return LottTrajectory(std::move(states), q);
}

ConjugateTrajectory conjugate_heat_solve(const LottTrajectory& traj,
                                         const ScalarField& phi_terminal,
                                         double tau_start,
                                         const std::vector<double>& output_taus,
                                         const HeatOptions& options) {
  if (output_taus.empty())
    throw input_error("conjugate_heat_solve: no output taus");
  for (std::size_t i = 0; i < output_taus.size(); ++i) {
    if (output_taus[i] < tau_start - 1e-15)
      throw input_error("conjugate_heat_solve: output tau below start");
    if (i > 0 && output_taus[i] <= output_taus[i - 1])
      throw input_error("conjugate_heat_solve: taus must be increasing");
  }
  const double T = traj.t_end();
  if (!(phi_terminal.min() > 0.0))
    throw input_error("conjugate_heat_solve: terminal data must be positive");

  // d phi/d tau = L phi - R_q phi at t = T - tau.
  auto rhs = [&](double tau, const ScalarField& phi) {
    SnapshotPtr snap = traj.snapshot_at(T - tau);
    ScalarField out = witten_laplacian(*snap, phi);
    ScalarField rq = traj.rq_at(T - tau);
    for (std::size_t node = 0; node < phi.grid().size(); ++node)
      out[node] -= rq[node] * phi[node];
    return out;
  };

  ScalarField phi = options.normalize_initial
                        ? normalize_mass(phi_terminal,
                                         *traj.snapshot_at(T - tau_start))
                        : phi_terminal;
  double tau = tau_start;
  ConjugateTrajectory out;
  out.q = traj.q();
  for (double tau_out : output_taus) {
    double gap = tau_out - tau;
    if (gap > 0.0) {
      SnapshotPtr snap = traj.snapshot_at(T - tau);
      const double dt_stable = stable_heat_dt(*snap, options.safety);
      const long steps = std::max<long>(1, (long)std::ceil(gap / dt_stable));
      for (long s = 0; s < steps; ++s) {
        const double target =
            (s + 1 == steps) ? tau_out : tau + gap / steps;
        const double dt = target - tau;
        ScalarField k1 = rhs(tau, phi);
        ScalarField stage = phi;
        axpy(0.5 * dt, k1, stage);
        ScalarField k2 = rhs(tau + 0.5 * dt, stage);
        stage = phi;
        axpy(0.5 * dt, k2, stage);
        ScalarField k3 = rhs(tau + 0.5 * dt, stage);
        stage = phi;
        axpy(dt, k3, stage);
        ScalarField k4 = rhs(tau + dt, stage);
        axpy(dt / 6.0, k1, phi);
        axpy(dt / 3.0, k2, phi);
        axpy(dt / 3.0, k3, phi);
        axpy(dt / 6.0, k4, phi);
        tau = target;
        const double lo = phi.min();
        const double hi = std::max(std::abs(phi.max()), std::abs(lo));
        if (!(hi > 0.0) || lo < -options.positivity_tol * hi) {
          std::ostringstream os;
          os << "conjugate heat solve lost positivity at tau = " << tau;
          throw stability_error(os.str());
        }
      }
    }
    out.states.push_back(
        ConjugateState{tau, T - tau, phi, traj.snapshot_at(T - tau)});
  }
  return out;
}

ScalarField eta_from_phi(const ScalarField& phi, double tau, int n, double q) {
  if (!(tau > 0.0)) throw parameter_error("eta_from_phi: tau must be > 0");
  if (!(phi.min() > 0.0))
    throw input_error("eta_from_phi: phi must be positive");
  const double shift = 0.5 * (n + q) * std::log(4.0 * M_PI * tau);
  return map(phi, [shift](double p) { return -std::log(p) - shift; });
}

ScalarField phi_from_eta(const ScalarField& eta, double tau, int n, double q) {
  if (!(tau > 0.0)) throw parameter_error("phi_from_eta: tau must be > 0");
  const double scale = std::pow(4.0 * M_PI * tau, -0.5 * (n + q));
  return map(eta, [scale](double e) { return scale * std::exp(-e); });
}

std::vector<std::pair<double, SymTensorField>> evolve_ricci_flow(
    SymTensorField g0, double t0, const std::vector<double>& output_times,
    double safety) {
  auto rate = [](const SymTensorField& g) { return scaled(ricci_tensor(g), -2.0); };
  std::vector<std::pair<double, SymTensorField>> out;
  SymTensorField g = std::move(g0);
  double t = t0;
  for (double t_out : output_times) {
    while (t < t_out - 1e-14) {
      SnapshotPtr snap = snapshot_or_singular(g, ScalarField(g.grid_ptr()), t);
      double dt = std::min(stable_heat_dt(*snap, safety), t_out - t);
      SymTensorField k1 = rate(g);
      SymTensorField stage = g;
      axpy(0.5 * dt, k1, stage);
      SymTensorField k2 = rate(stage);
      stage = g;
      axpy(0.5 * dt, k2, stage);
      SymTensorField k3 = rate(stage);
      stage = g;
      axpy(dt, k3, stage);
      SymTensorField k4 = rate(stage);
      axpy(dt / 6.0, k1, g);
      axpy(dt / 3.0, k2, g);
      axpy(dt / 3.0, k3, g);
      axpy(dt / 6.0, k4, g);
      t += dt;
    }
    out.emplace_back(t_out, g);
  }
  return out;
}

}  // namespace geoflow
