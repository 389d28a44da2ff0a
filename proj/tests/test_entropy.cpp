#include <doctest.h>

#include <cmath>

#include "geoflow/entropy.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/operators.hpp"
#include "geoflow/warped.hpp"
#include "support/oracles.hpp"

using namespace geoflow;

namespace {

GridPtr circle(int n, double L = 2 * M_PI) { return make_grid({n}, {L}); }

FlowState uniform_state(SnapshotPtr snap, double t) {
  ScalarField u(snap->grid_ptr());
  for (auto& x : u.values()) x = 1.0;
  return FlowState{t, snap, normalize_mass(u, *snap)};
}

FlowState kernel_state(GridPtr grid, double t, double center) {
  auto snap = make_flat_snapshot(grid);
  ScalarField u = oracles::sample_wrapped_kernel(grid, t, center);
  return FlowState{t, snap, normalize_mass(u, *snap)};
}

MetricSchedule static_schedule(SnapshotPtr snap, double t0, double t1) {
  return MetricSchedule::fixed(std::move(snap), t0, t1);
}

}  // namespace

TEST_CASE("shannon entropy closed values") {
  auto grid = circle(128);
  FlowState uniform = uniform_state(make_flat_snapshot(grid), 0.5);
  CHECK(shannon_entropy(uniform) ==
        doctest::Approx(std::log(2 * M_PI)).epsilon(1e-12));

  // wrapped gaussian on a large torus carries the gaussian entropy
  auto big = circle(512, 20 * M_PI);
  FlowState gauss = kernel_state(big, 0.05, 10 * M_PI);
  CHECK(std::abs(shannon_entropy(gauss) - oracles::gaussian_entropy(0.05)) <=
        1e-6);

  // H <= log mu(M), equality only for the uniform state
  auto snap = make_flat_snapshot(grid);
  const double log_vol = std::log(2 * M_PI);
  for (unsigned long long seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL, 6ULL}) {
    ScalarField u = oracles::random_positive_field(grid, seed);
    FlowState st{0.3, snap, normalize_mass(u, *snap)};
    CHECK(shannon_entropy(st) <= log_vol + 1e-12);
  }
  CHECK(shannon_entropy(uniform) == doctest::Approx(log_vol));

  // normalization is a precondition
  ScalarField u2(grid);
  for (auto& x : u2.values()) x = 2.0;
  CHECK_THROWS_AS(shannon_entropy(FlowState{0.5, snap, u2}), input_error);
}

TEST_CASE("H_m and H_{m,K} definitions") {
  auto big = circle(512, 20 * M_PI);
  FlowState gauss = kernel_state(big, 0.05, 10 * M_PI);
  // m = n = 1 gaussian: H_m vanishes
  CHECK(std::abs(entropy_Hm(gauss, 1.0)) <= 1e-6);
  // K = 0 reduces exactly
  CHECK(entropy_HmK(gauss, 1.0, 0.0) == entropy_Hm(gauss, 1.0));

  // the K-correction is (m/2) K t (1 + K t / 6): m=2, K=1, t=0.5 -> 13/24
  auto grid = circle(64);
  FlowState uniform = uniform_state(make_flat_snapshot(grid), 0.5);
  const double diff = entropy_Hm(uniform, 2.0) - entropy_HmK(uniform, 2.0, 1.0);
  CHECK(diff == doctest::Approx(13.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("W closed forms") {
  auto grid = circle(128);
  FlowState uniform = uniform_state(make_flat_snapshot(grid), 0.5);
  // gradient term vanishes: W equals H = log mu(M)
  CHECK(w_entropy(uniform) ==
        doctest::Approx(std::log(2 * M_PI)).epsilon(1e-12));

  // gaussian equality case: W_n of the near-kernel state is ~ 0
  auto big = circle(512, 20 * M_PI);
  for (double t : {0.02, 0.05, 0.1}) {
    FlowState gauss = kernel_state(big, t, 10 * M_PI);
    CHECK(std::abs(w_entropy_m(gauss, 1.0)) <= 1e-3);
  }

  // K-consistency: W_{m,K} - W_m = -m (K t + K^2 t^2 / 4)
  FlowState gauss = kernel_state(big, 0.05, 10 * M_PI);
  const double m = 2.5, K = 0.8, t = 0.05;
  CHECK(w_entropy_mK(gauss, m, K) - w_entropy_m(gauss, m) ==
        doctest::Approx(-m * (K * t + K * K * t * t / 4)).epsilon(1e-13));
}

TEST_CASE("W_m matches the finite difference of t H_m at second order") {
  auto grid = circle(128);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  MetricSchedule sched = static_schedule(snap, 0.2, 0.4);
  ScalarField u0 = oracles::random_positive_field(grid, 9, 0.4, 2);

  const double m = 3.0;
  auto fd_error = [&](double dt) {
    std::vector<double> times = {0.3 - dt, 0.3, 0.3 + dt};
    FlowTrajectory traj = evolve_heat(sched, u0, times);
    std::vector<double> t_hm;
    for (const auto& st : traj.states)
      t_hm.push_back(st.t * entropy_Hm(st, m));
    const double fd = (t_hm[2] - t_hm[0]) / (2 * dt);
    return std::abs(fd - w_entropy_m(traj.states[1], m));
  };
  const double e1 = fd_error(4e-3);
  const double e2 = fd_error(2e-3);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
}

TEST_CASE("d2H formula: stationary and single-mode cases") {
  auto grid = circle(128);
  auto snap = make_flat_snapshot(grid);
  MetricSchedule sched = static_schedule(snap, 0.05, 2.0);

  FlowState uniform = uniform_state(snap, 0.5);
  CHECK(std::abs(d2H_rhs(uniform, sched)) <= 1e-12);

  // u ~ 1 + eps e^{-t} cos x: compare against the trajectory difference
  ScalarField u0 = ScalarField::sample(grid, [](const double* x) {
    return (1.0 + 0.1 * std::cos(x[0])) / (2 * M_PI);
  });
  const double dt = 1e-4;
  std::vector<double> times = {0.5 - dt, 0.5, 0.5 + dt};
  FlowTrajectory traj = evolve_heat(sched, u0, times);
  std::vector<double> h;
  for (const auto& st : traj.states) h.push_back(shannon_entropy(st));
  const double fd = (h[2] - 2 * h[1] + h[0]) / (dt * dt);
  const double rhs = d2H_rhs(traj.states[1], sched);
  CHECK(std::abs(fd - rhs) <= 1e-3 * std::abs(rhs));
}

TEST_CASE("dWm formula: stationary hand value and gaussian middle term") {
  auto grid = circle(128);
  auto snap = make_flat_snapshot(grid);
  MetricSchedule sched = static_schedule(snap, 0.05, 2.0);
  FlowState uniform = uniform_state(snap, 0.4);

  // phi = 0, uniform u: the formula collapses to -m/2t exactly
  for (double m : {2.0, 3.0, 5.5}) {
    CHECK(std::abs(dWm_rhs(uniform, sched, m) + 0.5 * m / 0.4) <= 1e-12);
  }
  CHECK_THROWS_AS(dWm_rhs(uniform, sched, 1.0), parameter_error);

  // near-kernel state with m = n + 1: hessian term ~ 0, middle term -1/2t
  auto big = circle(512, 20 * M_PI);
  MetricSchedule sched_big =
      static_schedule(make_flat_snapshot(big), 0.01, 1.0);
  FlowState gauss = kernel_state(big, 0.05, 10 * M_PI);
  const double rhs = dWm_rhs(gauss, sched_big, 2.0);
  CHECK(std::abs(rhs + 1.0 / (2 * 0.05)) <= 1e-2 * (1.0 / (2 * 0.05)));

  // K = 0 reduces the K-variant exactly
  CHECK(dWmK_rhs(uniform, sched, 3.0, 0.0) == dWm_rhs(uniform, sched, 3.0));
}

TEST_CASE("dW formula (Ric(L) form) matches the trajectory derivative") {
  auto grid = circle(256);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  MetricSchedule sched = static_schedule(snap, 0.1, 0.3);
  ScalarField u0 = ScalarField::sample(
      grid, [](const double* x) { return std::exp(0.6 * std::cos(x[0])); });
  const double dt = 5e-4;
  FlowTrajectory traj = evolve_heat(sched, u0, {0.2 - dt, 0.2, 0.2 + dt});
  std::vector<double> w;
  for (const auto& st : traj.states) w.push_back(w_entropy(st));
  const double fd = (w[2] - w[0]) / (2 * dt);
  const double rhs = dW_rhs(traj.states[1], sched);
  CHECK(EntropyReport::rel_residual(fd, rhs) <= 1e-3);
}

TEST_CASE("pointwise algebraic identity behind the W_m derivation") {
  // 2t |H|^2 + m/2t = 2t |H + g/2t|^2 + (m-n)/2t - 2 tr_g H  for H = Hess log u
  auto grid = circle(128);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.3 * std::sin(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  ScalarField u = oracles::random_positive_field(grid, 13);
  LogDerivatives ld = log_derivatives(*snap, u);

  const double t = 0.2, m = 3.0;
  ScalarField h_sq = tensor_norm_sq(*snap, ld.hess);
  SymTensorField shifted = ld.hess;
  axpy(1.0 / (2 * t), snap->metric(), shifted);
  ScalarField h_shift_sq = tensor_norm_sq(*snap, shifted);
  ScalarField trace = tensor_dot(*snap, ld.hess, snap->metric());

  double worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double lhs = 2 * t * h_sq[i] + 0.5 * m / t;
    const double rhs = 2 * t * h_shift_sq[i] + 0.5 * (m - 1) / t - 2 * trace[i];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("formula residual report on a stationary run") {
  auto grid = circle(64);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  MetricSchedule sched = static_schedule(snap, 0.05, 0.25);
  ScalarField u0(grid);
  for (auto& x : u0.values()) x = 1.0;
  FlowTrajectory traj = evolve_heat(
      sched, u0, {0.05, 0.07, 0.09, 0.11, 0.13, 0.15, 0.17, 0.19, 0.21});
  EntropyReport rep = formula_residuals(traj, sched, 3.0, 0.5);
  for (const auto& row : rep.rows) {
    if (!std::isnan(row.d2H_fd_rich))
      CHECK(std::abs(EntropyReport::residual(row.d2H_fd_rich, row.d2H_rhs)) <=
            1e-10);
    if (!std::isnan(row.dWm_fd_rich))
      CHECK(std::abs(EntropyReport::residual(row.dWm_fd_rich, row.dWm_rhs)) <=
            1e-10);
    if (!std::isnan(row.dWmK_fd_rich))
      CHECK(std::abs(EntropyReport::residual(row.dWmK_fd_rich,
                                             row.dWmK_rhs)) <= 1e-10);
  }
}

TEST_CASE("formula residual report on a moving bump") {
  auto grid = circle(256);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  MetricSchedule sched = static_schedule(snap, 0.05, 0.12);
  ScalarField u0 = ScalarField::sample(
      grid, [](const double* x) { return std::exp(0.8 * std::cos(x[0])); });

  std::vector<double> times;
  for (int i = 0; i <= 50; ++i) times.push_back(0.05 + 1e-3 * i);
  FlowTrajectory traj = evolve_heat(sched, u0, times);
  EntropyReport rep = formula_residuals(traj, sched, 3.0, 0.0);
  CHECK(rep.max_rel_d2H() <= 1e-3);
  CHECK(rep.max_rel_dWm() <= 1e-3);

  // dH/dt is non-negative and matches the Dirichlet form
  for (const auto& row : rep.rows) {
    if (std::isnan(row.dH_fd)) continue;
    CHECK(row.dH_fd >= -1e-9);
    CHECK(EntropyReport::rel_residual(row.dH_fd, row.dH_rhs) <= 1e-4);
  }

  // irregular timestamps are rejected
  FlowTrajectory ragged = traj;
  ragged.states[2].t += 1e-5;
  CHECK_THROWS_AS(formula_residuals(ragged, sched, 3.0, 0.0), input_error);
}

TEST_CASE("W_m decreases along a certified expanding schedule") {
  auto grid = circle(128);
  SymTensorField g0 = SymTensorField::identity(grid);
  MetricSchedule expanding = MetricSchedule::scaled(
      g0, ScalarField(grid), [](double t) { return 1.0 + t; },
      [](double) { return 1.0; }, 0.1, 1.2);
  ScalarField u0 = ScalarField::sample(
      grid, [](const double* x) { return std::exp(0.8 * std::cos(x[0])); });
  std::vector<double> times;
  for (int i = 0; i <= 10; ++i) times.push_back(0.1 + 0.1 * i);
  FlowTrajectory traj = evolve_heat(expanding, u0, times);
  EntropyReport rep = formula_residuals(traj, expanding, 3.0, 0.0);
  CHECK(rep.certified_m);
  CHECK(rep.wm_monotone == Verdict::pass);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].Wm < rep.rows[i - 1].Wm + 1e-8);
  CHECK(rep.certified_ricL);
  CHECK(rep.h_concave == Verdict::pass);
}

TEST_CASE("verdicts are withheld without a certificate") {
  auto grid = circle(64);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  MetricSchedule sched = static_schedule(snap, 0.05, 0.12);
  ScalarField u0 = ScalarField::sample(
      grid, [](const double* x) { return std::exp(0.4 * std::cos(x[0])); });
  std::vector<double> times = {0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  FlowTrajectory traj = evolve_heat(sched, u0, times);
  EntropyReport rep = formula_residuals(traj, sched, 3.0, 0.0);
  CHECK_FALSE(rep.certified_m);  // Ric_{m,n}(L) dips negative here
  CHECK(rep.wm_monotone == Verdict::not_applicable);
}

TEST_CASE("harnack certificates") {
  auto grid = circle(256);
  auto snap = make_flat_snapshot(grid);

  // uniform state: LHS = 0, defect = -(m/2t + mK/2 (1 + Kt/3))
  FlowState uniform = uniform_state(snap, 0.5);
  HarnackCertificate cert = harnack_defect(uniform, 2.0, 0.4);
  const double bound = 2.0 / (2 * 0.5) + 0.5 * 2.0 * 0.4 * (1 + 0.4 * 0.5 / 3);
  CHECK(cert.max_defect == doctest::Approx(-bound).epsilon(1e-12));
  CHECK(cert.pass);

  // wrapped near-kernel solution with m = n = 1, K = 0: defect stays <= 0
  FlowState gauss = kernel_state(grid, 0.25, M_PI);
  HarnackCertificate li_yau = harnack_defect(gauss, 1.0, 0.0, 1e-8);
  CHECK(li_yau.max_defect <= 1e-8);
  CHECK(li_yau.pass);

  // large t with K > 0 passes with room to spare
  FlowState late = kernel_state(grid, 2.0, M_PI);
  CHECK(harnack_defect(late, 1.0, 0.5).pass);

  CHECK_THROWS_AS(harnack_defect(uniform, 0.5, 0.0), parameter_error);
  CHECK_THROWS_AS(harnack_defect(uniform, 2.0, -1.0), parameter_error);
}

TEST_CASE("W_q values on static geometry") {
  // flat static, psi = 0, n-kernel data:
  // W_q(tau) = -q - (q/2) log(4 pi tau) up to wrap/resolution corrections
  auto grid = circle(512, 20 * M_PI);
  auto snap = make_flat_snapshot(grid);
  const double tau = 0.05, q = 1.0;
  ScalarField phi = normalize_mass(
      oracles::sample_wrapped_kernel(grid, tau, 10 * M_PI), *snap);
  const double wq = wq_entropy(snap, q, phi, tau);
  const double expected = -q - 0.5 * q * std::log(4 * M_PI * tau);
  CHECK(std::abs(wq - expected) <= 1e-3);

  // constant phi: W_q = tau int R_q phi dmu + eta - (n+q) exactly
  auto small = circle(64);
  ScalarField psi = ScalarField::sample(
      small, [](const double* x) { return 0.3 * std::sin(x[0]); });
  auto wsnap = make_snapshot(SymTensorField::identity(small), psi);
  ScalarField ones(small);
  for (auto& x : ones.values()) x = 1.0;
  ScalarField cphi = normalize_mass(ones, *wsnap);
  const double tau2 = 0.3;
  const double wq_c = wq_entropy(wsnap, q, cphi, tau2);
  ScalarField rq = warped_scalar_curvature(WarpedSpec(wsnap, q));
  const double eta_val =
      -std::log(cphi[0]) - 0.5 * (1 + q) * std::log(4 * M_PI * tau2);
  const double expected_c =
      tau2 * inner_mu(rq, cphi, *wsnap) + eta_val - (1 + q);
  CHECK(wq_c == doctest::Approx(expected_c).epsilon(1e-12));

  // normalization is enforced
  CHECK_THROWS_AS(wq_entropy(snap, q, ones, tau), input_error);
}

TEST_CASE("dWq matches the finite difference along a conjugate solve") {
  auto grid = circle(64);
  ScalarField psi = ScalarField::sample(
      grid, [](const double* x) { return 0.3 * std::sin(x[0]); });
  LottState init{0.0, SymTensorField::identity(grid), psi};
  const double T = 0.5;
  LottTrajectory traj = evolve_lott(init, 1.0, T);
  ScalarField phi_T = oracles::sample_wrapped_kernel(grid, 0.05, M_PI);
  for (auto& x : phi_T.values()) x += 0.02;  // eta needs phi away from zero
  std::vector<double> taus;
  for (int i = 0; i <= 30; ++i) taus.push_back(0.05 + 0.01 * i);
  ConjugateTrajectory conj = conjugate_heat_solve(traj, phi_T, 0.05, taus);
  WqSeries series = wq_series(conj);
  CHECK(series.max_rel_residual <= 1e-2);
  CHECK(series.monotone == Verdict::pass);
}
