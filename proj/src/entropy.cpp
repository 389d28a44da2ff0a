#include "geoflow/entropy.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/operators.hpp"
#include "geoflow/warped.hpp"

namespace geoflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<ScalarField> partials_of(const ScalarField& f) {
  std::vector<ScalarField> d;
  for (int a = 0; a < f.grid().dim(); ++a)
    d.push_back(spectral_derivative(f, a));
  return d;
}

VectorField raise_index(const GeometrySnapshot& snap, const VectorField& cov) {
  const int n = snap.dim();
  const auto& ginv = snap.inverse_metric();
  VectorField out(cov.grid_ptr());
  for (int i = 0; i < n; ++i) {
    auto oi = out.component(i);
    for (std::size_t node = 0; node < cov.grid().size(); ++node) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += ginv(i, j, node) * cov(j, node);
      oi[node] = s;
    }
  }
  return out;
}

void check_mass(const FlowState& state) {
  const double mass = integrate(state.u, *state.snapshot);
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "entropy functional: int u dmu = " << mass
       << " is not 1 (normalize the state first)";
    throw input_error(os.str());
  }
}

// -u log u with the x log x extension by zero. Values below the ringing
// scale of the field (estimated from its negative dips; zero for strictly
// positive data) are numerically indistinguishable from zero and extended
// the same way -- the |log| amplification would otherwise turn
// sub-resolution noise in a long tail into an O(1e-2) entropy shift.
double neg_u_log_u(const ScalarField& u, const GeometrySnapshot& snap) {
  const auto& rho = snap.measure_density();
  const double threshold = 8.0 * std::max(0.0, -u.min());
  long double acc = 0.0L;
  for (std::size_t node = 0; node < u.grid().size(); ++node) {
    const double x = u[node];
    if (x > threshold)
      acc -= static_cast<long double>(x) * std::log(x) * rho[node];
  }
  return static_cast<double>(acc * u.grid().cell_volume());
}

}  // namespace

LogDerivatives log_derivatives(const GeometrySnapshot& snap,
                               const ScalarField& u,
                               const EntropyOptions& options) {
  require_same_grid(snap.grid(), u.grid(), "log_derivatives");
  const Grid& grid = u.grid();
  const int n = grid.dim();
  const double u_max = u.max();
  const double u_min = u.min();
  if (!(u_max > 0.0))
    throw input_error("log_derivatives: field has no positive part");

  LogDerivatives out{ScalarField(u.grid_ptr()), VectorField(u.grid_ptr()),
                     SymTensorField(u.grid_ptr()), ScalarField(u.grid_ptr()),
                     ScalarField(u.grid_ptr()), false};

  for (std::size_t node = 0; node < grid.size(); ++node)
    out.log_u[node] = std::log(std::max(u[node], 1e-300));

  // The log route needs every value to sit safely above the spectral
  // rounding floor of the field, else log u has noise kinks whose Gibbs
  // oscillations pollute the derivatives globally.
  const bool log_route = u_min > 1e-10 * u_max;
  if (log_route) {
    const auto dw = partials_of(out.log_u);
    for (int a = 0; a < n; ++a) {
      auto dst = out.grad_cov.component(a);
      auto src = dw[a].values();
      std::copy(src.begin(), src.end(), dst.begin());
    }
    out.hess = hessian(snap, out.log_u);
    auto mv = out.mask.values();
    std::fill(mv.begin(), mv.end(), 1.0);
  } else {
    out.ratio_route = true;
    const double threshold = options.mask_rel * u_max;
    const auto du = partials_of(u);
    SymTensorField hess_u = hessian(snap, u);
    for (std::size_t node = 0; node < grid.size(); ++node) {
      if (u[node] >= threshold) {
        out.mask[node] = 1.0;
        const double inv = 1.0 / u[node];
        for (int a = 0; a < n; ++a)
          out.grad_cov(a, node) = du[a][node] * inv;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j)
            out.hess.at(i, j, node) =
                hess_u(i, j, node) * inv -
                out.grad_cov(i, node) * out.grad_cov(j, node);
      }
    }
  }

  const auto& ginv = snap.inverse_metric();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += ginv(i, j, node) * out.grad_cov(i, node) * out.grad_cov(j, node);
    out.grad_sq[node] = s;
  }
  return out;
}

double dirichlet_form(const GeometrySnapshot& snap, const ScalarField& u,
                      const LogDerivatives& ld) {
  if (!ld.ratio_route) return inner_mu(ld.grad_sq, u, snap);
  const int n = snap.dim();
  ScalarField v = map(u, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  std::vector<ScalarField> dv;
  for (int a = 0; a < n; ++a) dv.push_back(spectral_derivative(v, a));
  // Sub-resolution ringing shows up as negative dips; its sqrt-kinks would
  // otherwise dominate the integrand in the dead tail. The smooth weight is
  // applied after differentiation, so it adds no kinks of its own, and it
  // is inactive (eta = 0) for strictly positive data.
  const double eta = 8.0 * std::max(0.0, -u.min());
  const double eta_sq = eta * eta;
  const auto& ginv = snap.inverse_metric();
  ScalarField integrand(u.grid_ptr());
  for (std::size_t node = 0; node < u.grid().size(); ++node) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += ginv(i, j, node) * dv[i][node] * dv[j][node];
    double w = 1.0;
    if (eta_sq > 0.0) {
      const double uu = u[node] * u[node];
      w = uu / (uu + eta_sq);
    }
    integrand[node] = 4.0 * s * w;
  }
  return integrate(integrand, snap);
}

double shannon_entropy(const FlowState& state, const EntropyOptions&) {
  check_mass(state);
  return neg_u_log_u(state.u, *state.snapshot);
}

double entropy_Hm(const FlowState& state, double m,
                  const EntropyOptions& options) {
  if (!(state.t > 0.0)) throw parameter_error("entropy_Hm: t must be > 0");
  return shannon_entropy(state, options) -
         0.5 * m * (1.0 + std::log(4.0 * M_PI * state.t));
}

double entropy_HmK(const FlowState& state, double m, double K,
                   const EntropyOptions& options) {
  const double t = state.t;
  return entropy_Hm(state, m, options) -
         0.5 * m * K * t * (1.0 + K * t / 6.0);
}

double w_entropy(const FlowState& state, const EntropyOptions& options) {
  check_mass(state);
  const LogDerivatives ld = log_derivatives(*state.snapshot, state.u, options);
  const double dirichlet = dirichlet_form(*state.snapshot, state.u, ld);
  return state.t * dirichlet + neg_u_log_u(state.u, *state.snapshot);
}

double w_entropy_m(const FlowState& state, double m,
                   const EntropyOptions& options) {
  if (!(state.t > 0.0)) throw parameter_error("w_entropy_m: t must be > 0");
  return w_entropy(state, options) -
         0.5 * m * (2.0 + std::log(4.0 * M_PI * state.t));
}

double w_entropy_mK(const FlowState& state, double m, double K,
                    const EntropyOptions& options) {
  const double t = state.t;
  return w_entropy_m(state, m, options) - m * (K * t + K * K * t * t / 4.0);
}

double dH_rhs(const FlowState& state, const EntropyOptions& options) {
  const LogDerivatives ld = log_derivatives(*state.snapshot, state.u, options);
  return dirichlet_form(*state.snapshot, state.u, ld);
}

namespace {

struct DissipationPieces {
  LogDerivatives ld;
  VectorField grad_up;  // (grad log u)^i
};

DissipationPieces pieces_for(const FlowState& state,
                             const EntropyOptions& options) {
  LogDerivatives ld = log_derivatives(*state.snapshot, state.u, options);
  VectorField up = raise_index(*state.snapshot, ld.grad_cov);
  return DissipationPieces{std::move(ld), std::move(up)};
}

SymTensorField half_rate_plus(const FlowState& state,
                              const MetricSchedule& schedule,
                              const SymTensorField& curvature) {
  SymTensorField s = schedule.metric_rate_at(state.t);
  for (int c = 0; c < s.slots(); ++c)
    for (auto& v : s.component(c)) v *= 0.5;
  return add(s, curvature);
}

}  // namespace

double d2H_rhs(const FlowState& state, const MetricSchedule& schedule,
               const EntropyOptions& options) {
  const auto p = pieces_for(state, options);
  const GeometrySnapshot& snap = *state.snapshot;
  ScalarField a = tensor_norm_sq(snap, p.ld.hess);
  SymTensorField s = half_rate_plus(state, schedule, bakry_emery_tensor(snap));
  ScalarField q = quadratic_form(s, p.grad_up, p.grad_up);
  return -2.0 * (inner_mu(a, state.u, snap) + inner_mu(q, state.u, snap));
}

double dW_rhs(const FlowState& state, const MetricSchedule& schedule,
              const EntropyOptions& options) {
  const auto p = pieces_for(state, options);
  const GeometrySnapshot& snap = *state.snapshot;
  ScalarField a = tensor_norm_sq(snap, p.ld.hess);
  SymTensorField s = half_rate_plus(state, schedule, bakry_emery_tensor(snap));
  ScalarField q = quadratic_form(s, p.grad_up, p.grad_up);
  const double t = state.t;
  return -2.0 * t * (inner_mu(a, state.u, snap) + inner_mu(q, state.u, snap)) +
         2.0 * inner_mu(p.ld.grad_sq, state.u, snap);
}

namespace {

// Shared core of the W_m and W_{m,K} dissipation formulas; shift = 1/2t (+ K/2).
double dissipation_rhs(const FlowState& state, const MetricSchedule& schedule,
                       double m, double K, const EntropyOptions& options) {
  const GeometrySnapshot& snap = *state.snapshot;
  const int n = snap.dim();
  if (!(m > n)) {
    std::ostringstream os;
    os << "W_m dissipation: m = " << m << " must exceed dim = " << n;
    throw parameter_error(os.str());
  }
  const double t = state.t;
  const double q = m - n;
  const double shift = 1.0 / (2.0 * t) + 0.5 * K;
  const auto p = pieces_for(state, options);

  SymTensorField shifted = p.ld.hess;
  axpy(shift, snap.metric(), shifted);
  ScalarField a = tensor_norm_sq(snap, shifted);

  const auto dphi = partials_of(snap.potential());
  ScalarField b(state.u.grid_ptr());
  for (std::size_t node = 0; node < snap.grid().size(); ++node) {
    double drift = 0.0;
    for (int i = 0; i < n; ++i) drift += dphi[i][node] * p.grad_up(i, node);
    const double w = drift - q * shift;
    b[node] = w * w;
  }

  SymTensorField s =
      half_rate_plus(state, schedule, bakry_emery_tensor_m(snap, m));
  if (K != 0.0) axpy(K, snap.metric(), s);
  ScalarField c = quadratic_form(s, p.grad_up, p.grad_up);

  if (p.ld.ratio_route) {
    // Outside the mask the shifted tensors are pure g-multiples; drop them
    // the same way the gradient terms were dropped.
    a = a * p.ld.mask;
    b = b * p.ld.mask;
  }
  return -2.0 * t * inner_mu(a, state.u, snap) -
         (2.0 * t / q) * inner_mu(b, state.u, snap) -
         2.0 * t * inner_mu(c, state.u, snap);
}

}  // namespace

double dWm_rhs(const FlowState& state, const MetricSchedule& schedule, double m,
               const EntropyOptions& options) {
  return dissipation_rhs(state, schedule, m, 0.0, options);
}

double dWmK_rhs(const FlowState& state, const MetricSchedule& schedule,
                double m, double K, const EntropyOptions& options) {
  if (K < 0.0) throw parameter_error("dWmK_rhs: K must be >= 0");
  return dissipation_rhs(state, schedule, m, K, options);
}

double EntropyReport::rel_residual(double lhs, double rhs) {
  const double denom = std::max(std::abs(rhs), 1e-30);
  return std::abs(lhs - rhs) / denom;
}

namespace {

double max_over_rows(const std::vector<EntropyRow>& rows,
                     double (*lhs)(const EntropyRow&),
                     double (*rhs)(const EntropyRow&)) {
  double worst = 0.0;
  for (const auto& r : rows) {
    const double l = lhs(r), h = rhs(r);
    if (std::isnan(l) || std::isnan(h)) continue;
    worst = std::max(worst, EntropyReport::rel_residual(l, h));
  }
  return worst;
}

}  // namespace

double EntropyReport::max_rel_d2H() const {
  return max_over_rows(
      rows, [](const EntropyRow& r) { return r.d2H_fd_rich; },
      [](const EntropyRow& r) { return r.d2H_rhs; });
}
double EntropyReport::max_rel_dWm() const {
  return max_over_rows(
      rows, [](const EntropyRow& r) { return r.dWm_fd_rich; },
      [](const EntropyRow& r) { return r.dWm_rhs; });
}
double EntropyReport::max_rel_dWmK() const {
  return max_over_rows(
      rows, [](const EntropyRow& r) { return r.dWmK_fd_rich; },
      [](const EntropyRow& r) { return r.dWmK_rhs; });
}
double EntropyReport::max_rel_d2H_plain() const {
  return max_over_rows(
      rows, [](const EntropyRow& r) { return r.d2H_fd_plain; },
      [](const EntropyRow& r) { return r.d2H_rhs; });
}
double EntropyReport::max_rel_dWm_plain() const {
  return max_over_rows(
      rows, [](const EntropyRow& r) { return r.dWm_fd_plain; },
      [](const EntropyRow& r) { return r.dWm_rhs; });
}

EntropyReport formula_residuals(const FlowTrajectory& trajectory,
                                const MetricSchedule& schedule, double m,
                                double K, const EntropyOptions& options) {
  const auto& states = trajectory.states;
  const std::size_t nrows = states.size();
  if (nrows < 3)
    throw input_error("formula_residuals: need at least 3 output times");
  const double dt = states[1].t - states[0].t;
  for (std::size_t i = 1; i < nrows; ++i) {
    const double step = states[i].t - states[i - 1].t;
    if (std::abs(step - dt) > 1e-9 * std::abs(dt))
      throw input_error("formula_residuals: irregular timestamps");
  }

  EntropyReport report;
  report.m = m;
  report.K = K;
  report.rows.resize(nrows);

  // The W_m dissipation columns need m > n; with m = n (gaussian equality
  // runs) only the m-free formulas are evaluated.
  const bool m_strict = m > states[0].snapshot->dim();

  // Per-state values. Defects are time-independent on static schedules.
  double defect_m0 = kNaN, defect_mK0 = kNaN, defect_ricL0 = kNaN;
  if (schedule.is_static()) {
    if (m_strict) {
      defect_m0 = super_ricci_defect(schedule, m, 0.0, states[0].t).min();
      defect_mK0 = super_ricci_defect(schedule, m, K, states[0].t).min();
    }
    defect_ricL0 =
        super_ricci_defect(schedule, std::numeric_limits<double>::infinity(),
                           0.0, states[0].t)
            .min();
  }

  std::vector<double> h(nrows), wdata(nrows);
  for (std::size_t i = 0; i < nrows; ++i) {
    const FlowState& st = states[i];
    EntropyRow& row = report.rows[i];
    row.t = st.t;
    row.mass = trajectory.masses.empty() ? integrate(st.u, *st.snapshot)
                                         : trajectory.masses[i];

    const LogDerivatives ld = log_derivatives(*st.snapshot, st.u, options);
    const double dirichlet = dirichlet_form(*st.snapshot, st.u, ld);
    h[i] = neg_u_log_u(st.u, *st.snapshot);
    wdata[i] = st.t * dirichlet + h[i];

    const double log4pit = std::log(4.0 * M_PI * st.t);
    row.H = h[i];
    row.Hm = h[i] - 0.5 * m * (1.0 + log4pit);
    row.HmK = row.Hm - 0.5 * m * K * st.t * (1.0 + K * st.t / 6.0);
    row.W = wdata[i];
    row.Wm = wdata[i] - 0.5 * m * (2.0 + log4pit);
    row.WmK = row.Wm - m * (K * st.t + K * K * st.t * st.t / 4.0);

    row.dH_rhs = dirichlet;
    row.d2H_rhs = d2H_rhs(st, schedule, options);
    row.dWm_rhs = m_strict ? dWm_rhs(st, schedule, m, options) : kNaN;
    row.dWmK_rhs = m_strict ? dWmK_rhs(st, schedule, m, K, options) : kNaN;

    if (schedule.is_static()) {
      row.defect_m = defect_m0;
      row.defect_mK = defect_mK0;
      row.defect_ricL = defect_ricL0;
    } else {
      row.defect_m =
          m_strict ? super_ricci_defect(schedule, m, 0.0, st.t).min() : kNaN;
      row.defect_mK =
          m_strict ? super_ricci_defect(schedule, m, K, st.t).min() : kNaN;
      row.defect_ricL =
          super_ricci_defect(schedule,
                             std::numeric_limits<double>::infinity(), 0.0,
                             st.t)
              .min();
    }
  }

  // Finite-difference columns. The analytic -(m/2)(2 + log 4 pi t) and
  // K-correction parts are differentiated exactly; only the data integral
  // W(t) = int [t|grad log u|^2 - log u] u dmu goes through the stencil.
  for (std::size_t i = 0; i < nrows; ++i) {
    EntropyRow& row = report.rows[i];
    const double t = row.t;
    const double dWm_analytic = -0.5 * m / t;
    const double dWmK_analytic = dWm_analytic - m * K * (1.0 + 0.5 * K * t);

    row.dH_fd = kNaN;
    row.d2H_fd_plain = row.d2H_fd_rich = kNaN;
    row.dWm_fd_plain = row.dWm_fd_rich = kNaN;
    row.dWmK_fd_plain = row.dWmK_fd_rich = kNaN;

    if (i >= 1 && i + 1 < nrows) {
      const double d1h = (h[i + 1] - h[i - 1]) / (2.0 * dt);
      const double d1w = (wdata[i + 1] - wdata[i - 1]) / (2.0 * dt);
      const double d2h = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (dt * dt);
      row.dH_fd = d1h;
      row.d2H_fd_plain = d2h;
      row.dWm_fd_plain = d1w + dWm_analytic;
      row.dWmK_fd_plain = d1w + dWmK_analytic;
    }
    if (i >= 2 && i + 2 < nrows) {
      const double d1w_h = (wdata[i + 1] - wdata[i - 1]) / (2.0 * dt);
      const double d1w_2h = (wdata[i + 2] - wdata[i - 2]) / (4.0 * dt);
      const double d1w = (4.0 * d1w_h - d1w_2h) / 3.0;
      const double d2h_h = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (dt * dt);
      const double d2h_2h =
          (h[i + 2] - 2.0 * h[i] + h[i - 2]) / (4.0 * dt * dt);
      row.d2H_fd_rich = (4.0 * d2h_h - d2h_2h) / 3.0;
      row.dWm_fd_rich = d1w + dWm_analytic;
      row.dWmK_fd_rich = d1w + dWmK_analytic;
    }
  }

  auto certified = [&](double EntropyRow::*field) {
    for (const auto& r : report.rows)
      if (std::isnan(r.*field) || r.*field < -1e-10) return false;
    return true;
  };
  report.certified_m = m_strict && certified(&EntropyRow::defect_m);
  report.certified_mK = m_strict && certified(&EntropyRow::defect_mK);
  report.certified_ricL = certified(&EntropyRow::defect_ricL);

  auto monotone = [&](double EntropyRow::*field, double slack) {
    for (std::size_t i = 1; i < nrows; ++i)
      if (report.rows[i].*field > report.rows[i - 1].*field + slack)
        return Verdict::fail;
    return Verdict::pass;
  };
  report.wm_monotone = report.certified_m ? monotone(&EntropyRow::Wm, 1e-8)
                                          : Verdict::not_applicable;
  report.wmK_monotone = report.certified_mK ? monotone(&EntropyRow::WmK, 1e-8)
                                            : Verdict::not_applicable;
  if (report.certified_ricL) {
    report.h_concave = Verdict::pass;
    for (const auto& r : report.rows) {
      if (std::isnan(r.d2H_fd_rich)) continue;
      if (r.d2H_fd_rich > 1e-8 * (1.0 + std::abs(r.d2H_rhs)))
        report.h_concave = Verdict::fail;
    }
  }
  return report;
}

HarnackCertificate harnack_defect(const FlowState& state, double m, double K,
                                  double tolerance) {
  const GeometrySnapshot& snap = *state.snapshot;
  const int n = snap.dim();
  if (!(m >= n))
    throw parameter_error("harnack_defect: m must be at least the dimension");
  if (K < 0.0) throw parameter_error("harnack_defect: K must be >= 0");
  if (!(state.t > 0.0))
    throw parameter_error("harnack_defect: t must be > 0");

  // The defect is pointwise, so it can only be evaluated where u rises
  // above rounding noise; the mask from log_derivatives marks those nodes
  // (all of them for well-conditioned states).
  const LogDerivatives ld = log_derivatives(snap, state.u);
  ScalarField lu = witten_laplacian(snap, state.u);
  const double t = state.t;
  const double alpha = 1.0 + (2.0 / 3.0) * K * t;
  const double bound = 0.5 * m / t + 0.5 * m * K * (1.0 + K * t / 3.0);

  double worst = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  for (std::size_t node = 0; node < snap.grid().size(); ++node) {
    if (ld.mask[node] == 0.0) continue;
    ++evaluated;
    const double ratio = lu[node] / state.u[node];
    const double defect = ld.grad_sq[node] - alpha * ratio - bound;
    worst = std::max(worst, defect);
  }
  HarnackCertificate cert;
  cert.t = t;
  cert.m = m;
  cert.K = K;
  cert.max_defect = worst;
  cert.tolerance = tolerance;
  cert.pass = worst <= tolerance;
  cert.coverage =
      static_cast<double>(evaluated) / static_cast<double>(snap.grid().size());
  return cert;
}

double wq_entropy(const SnapshotPtr& snap_ptr, double q,
                  const ScalarField& phi, double tau) {
  const GeometrySnapshot& snap = *snap_ptr;
  const int n = snap.dim();
  const double mass = integrate(phi, snap);
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "wq_entropy: int phi dmu = " << mass << " is not 1";
    throw input_error(os.str());
  }
  ScalarField eta = eta_from_phi(phi, tau, n, q);
  const auto deta = partials_of(eta);
  const auto& ginv = snap.inverse_metric();
  ScalarField integrand(phi.grid_ptr());
  ScalarField rq = warped_scalar_curvature(WarpedSpec(snap_ptr, q));
  for (std::size_t node = 0; node < snap.grid().size(); ++node) {
    double gsq = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gsq += ginv(i, j, node) * deta[i][node] * deta[j][node];
    integrand[node] = tau * (gsq + rq[node]) + eta[node] - (n + q);
  }
  return inner_mu(integrand, phi, snap);
}

double dWq_rhs(const SnapshotPtr& snap_ptr, double q, const ScalarField& phi,
               double tau) {
  const GeometrySnapshot& snap = *snap_ptr;
  const int n = snap.dim();
  WarpedSpec spec(snap_ptr, q);
  WarpedBlocks ric = warped_ricci(spec);

  const LogDerivatives ldphi = log_derivatives(snap, phi);
  // eta = -log phi - const, so Hess eta = -Hess log phi.
  SymTensorField tensor = add(ric.horizontal, scaled(ldphi.hess, -1.0));
  axpy(-1.0 / (2.0 * tau), snap.metric(), tensor);
  ScalarField a = tensor_norm_sq(snap, tensor);

  const ScalarField& psi = snap.potential();
  ScalarField lap_psi = laplace_beltrami(snap, psi);
  const auto dpsi = partials_of(psi);
  const auto& ginv = snap.inverse_metric();
  ScalarField integrand(phi.grid_ptr());
  for (std::size_t node = 0; node < snap.grid().size(); ++node) {
    double psi_sq = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        psi_sq += ginv(i, j, node) * dpsi[i][node] * dpsi[j][node];
        // <grad psi, grad eta> with d eta = -d log phi
        cross -= ginv(i, j, node) * dpsi[i][node] * ldphi.grad_cov(j, node);
      }
    const double s =
        lap_psi[node] - psi_sq - cross - q / (2.0 * tau);
    integrand[node] = a[node] + s * s / q;
  }
  return -2.0 * tau * inner_mu(integrand, phi, snap);
}

WqSeries wq_series(const ConjugateTrajectory& conj) {
  const auto& states = conj.states;
  if (states.size() < 3)
    throw input_error("wq_series: need at least 3 output taus");
  const double dtau = states[1].tau - states[0].tau;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (std::abs(states[i].tau - states[i - 1].tau - dtau) >
        1e-9 * std::abs(dtau))
      throw input_error("wq_series: irregular tau spacing");

  WqSeries series;
  const std::size_t nrows = states.size();
  series.taus.resize(nrows);
  series.wq.resize(nrows);
  series.dwq_rhs.resize(nrows);
  series.dwq_fd_plain.assign(nrows, kNaN);
  series.dwq_fd_rich.assign(nrows, kNaN);
  for (std::size_t i = 0; i < nrows; ++i) {
    series.taus[i] = states[i].tau;
    series.wq[i] =
        wq_entropy(states[i].snapshot, conj.q, states[i].phi, states[i].tau);
    series.dwq_rhs[i] =
        dWq_rhs(states[i].snapshot, conj.q, states[i].phi, states[i].tau);
  }
  for (std::size_t i = 1; i + 1 < nrows; ++i)
    series.dwq_fd_plain[i] =
        (series.wq[i + 1] - series.wq[i - 1]) / (2.0 * dtau);
  for (std::size_t i = 2; i + 2 < nrows; ++i) {
    const double d_h = series.dwq_fd_plain[i];
    const double d_2h = (series.wq[i + 2] - series.wq[i - 2]) / (4.0 * dtau);
    series.dwq_fd_rich[i] = (4.0 * d_h - d_2h) / 3.0;
  }
  series.monotone = Verdict::pass;
  for (std::size_t i = 1; i < nrows; ++i)
    if (series.wq[i] > series.wq[i - 1] + 1e-8) series.monotone = Verdict::fail;
  series.max_rel_residual = 0.0;
  for (std::size_t i = 0; i < nrows; ++i) {
    if (std::isnan(series.dwq_fd_rich[i])) continue;
    series.max_rel_residual =
        std::max(series.max_rel_residual,
                 EntropyReport::rel_residual(series.dwq_fd_rich[i],
                                             series.dwq_rhs[i]));
  }
  return series;
}

}  // namespace geoflow
