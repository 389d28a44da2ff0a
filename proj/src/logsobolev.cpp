#include "geoflow/logsobolev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/heat.hpp"
#include "geoflow/operators.hpp"
#include "geoflow/warped.hpp"

namespace geoflow {

namespace {

constexpr double kClamp = 1e-150;

// Weight-free form of the minimization: with c = (4 pi t)^{-m/2} and
// v = sqrt(c) u, the constraint becomes int v^2 dmu = 1, the functional
// E[v] = int (T |grad v|^2 + (V - c0) v^2 - v^2 log v^2) dmu, and
// mu = E[v*] + log c. The Euler-Lagrange operator is
//   A v = -T L v + (V - c0) v - 2 v log v.
struct VProblem {
  SnapshotPtr snap;
  double T = 0.0;                  // 4t (or 4 tau)
  std::optional<ScalarField> V;    // tau R_q for the Lott variant
  double c0 = 0.0;                 // m, m(1+Kt/2)^2, or n+q
  double log_weight = 0.0;         // log c, added to the v-space mu
};

ScalarField apply_el(const VProblem& p, const ScalarField& v) {
  ScalarField out = witten_laplacian(*p.snap, v);
  for (std::size_t i = 0; i < v.grid().size(); ++i) {
    double val = -p.T * out[i] - p.c0 * v[i] - 2.0 * v[i] * std::log(v[i]);
    if (p.V) val += (*p.V)[i] * v[i];
    out[i] = val;
  }
  return out;
}

// Frechet derivative of v -> A[v]v at v:
//   J h = -T L h + (V - c0 - 2 - 2 log v) h.
ScalarField apply_el_jacobian(const VProblem& p, const ScalarField& v,
                              const ScalarField& h) {
  ScalarField out = witten_laplacian(*p.snap, h);
  for (std::size_t i = 0; i < h.grid().size(); ++i) {
    double val =
        -p.T * out[i] + (-p.c0 - 2.0 - 2.0 * std::log(v[i])) * h[i];
    if (p.V) val += (*p.V)[i] * h[i];
    out[i] = val;
  }
  return out;
}

double functional(const VProblem& p, const ScalarField& v) {
  // E = T int |grad v|^2 + int (V - c0) v^2 - int v^2 log v^2
  const int n = p.snap->dim();
  std::vector<ScalarField> dv;
  for (int a = 0; a < n; ++a) dv.push_back(spectral_derivative(v, a));
  const auto& ginv = p.snap->inverse_metric();
  ScalarField integrand(v.grid_ptr());
  for (std::size_t node = 0; node < v.grid().size(); ++node) {
    double gsq = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gsq += ginv(i, j, node) * dv[i][node] * dv[j][node];
    const double v2 = v[node] * v[node];
    double val = p.T * gsq - p.c0 * v2 - 2.0 * v2 * std::log(v[node]);
    if (p.V) val += (*p.V)[node] * v2;
    integrand[node] = val;
  }
  return integrate(integrand, *p.snap);
}

ScalarField clamp_positive(ScalarField v) {
  for (auto& x : v.values()) x = std::max(std::abs(x), kClamp);
  return v;
}

ScalarField normalize_l2(const ScalarField& v, const GeometrySnapshot& snap) {
  const double norm = std::sqrt(inner_mu(v, v, snap));
  if (!(norm > 0.0)) throw convergence_error("log-Sobolev: zero iterate");
  return (1.0 / norm) * v;
}

// Mean coefficient for the flat Helmholtz preconditioner.
double mean_inverse_metric_scale(const GeometrySnapshot& snap) {
  const int n = snap.dim();
  const auto& ginv = snap.inverse_metric();
  double acc = 0.0;
  for (std::size_t node = 0; node < snap.grid().size(); ++node) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += ginv(i, i, node);
    acc += tr / n;
  }
  return acc / snap.grid().size();
}

struct StartResult {
  double mu = 0.0;
  ScalarField v;
  double defect = 0.0;
  long iterations = 0;
  bool converged = false;
};

StartResult minimize_from(const VProblem& p, ScalarField v0, bool precondition,
                          int max_iterations, double defect_tol) {
  const GeometrySnapshot& snap = *p.snap;
  ScalarField v = normalize_l2(clamp_positive(std::move(v0)), snap);
  const double abar = mean_inverse_metric_scale(snap);
  auto precond = [&](const ScalarField& r) {
    ScalarField z(r.grid_ptr());
    fft::apply_isotropic_multiplier(
        r.grid(), r.values(), z.values(),
        [&](double k2) { return 1.0 / (1.0 + p.T * abar * k2); });
    return z;
  };

  // Two phases. Globalization: Armijo backtracking on E along the
  // preconditioned projected gradient. Polish (small defect, where E can no
  // longer discriminate between iterates): a two-direction minimal-residual
  // step for the linearized eigenproblem, residual-monotone by
  // construction up to the (tiny) nonlinear remainder.
  const double polish_threshold = 1e-5;
  double step = 1.0;
  StartResult result{0.0, v, 0.0, 0, false};
  double energy = functional(p, v);
  std::optional<ScalarField> prev_dir;
  double stall_defect = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (long it = 0; it < max_iterations; ++it) {
    ScalarField w = apply_el(p, v);
    const double rho = inner_mu(w, v, snap);
    ScalarField r = w;
    axpy(-rho, v, r);
    const double defect = std::sqrt(std::max(0.0, inner_mu(r, r, snap)));
    result.mu = rho;
    result.v = v;
    result.defect = defect;
    result.iterations = it;
    if (defect <= defect_tol) {
      result.converged = true;
      return result;
    }

    ScalarField z = precondition ? precond(r) : r;
    double slope = inner_mu(r, z, snap);
    if (!(slope > 0.0)) {
      z = r;
      slope = inner_mu(r, z, snap);
    }
    axpy(-inner_mu(z, v, snap), v, z);  // tangent projection

    // Enter the polish dynamics when close, or when the predicted Armijo
    // decrease has fallen below what E evaluations can resolve.
    const bool polish = defect < polish_threshold ||
                        slope <= 1e-10 * (std::abs(energy) + 1.0);
    if (polish) {
      // Minimize || r - a (J - rho) z - b (J - rho) d ||_mu over (a, b).
      auto shifted_jacobian = [&](const ScalarField& h) {
        ScalarField jh = apply_el_jacobian(p, v, h);
        axpy(-rho, h, jh);
        axpy(-inner_mu(jh, v, snap), v, jh);
        return jh;
      };
      ScalarField jz = shifted_jacobian(z);
      double a = 0.0, b = 0.0;
      if (prev_dir) {
        ScalarField jd = shifted_jacobian(*prev_dir);
        const double zz = inner_mu(jz, jz, snap);
        const double zd = inner_mu(jz, jd, snap);
        const double dd = inner_mu(jd, jd, snap);
        const double rz = inner_mu(r, jz, snap);
        const double rd = inner_mu(r, jd, snap);
        const double det = zz * dd - zd * zd;
        if (det > 1e-28 * zz * dd) {
          a = (rz * dd - rd * zd) / det;
          b = (rd * zz - rz * zd) / det;
        } else {
          a = rz / std::max(zz, 1e-300);
        }
      } else {
        const double zz = inner_mu(jz, jz, snap);
        a = inner_mu(r, jz, snap) / std::max(zz, 1e-300);
      }
      ScalarField delta = a * z;
      if (prev_dir) axpy(b, *prev_dir, delta);
      ScalarField trial = v;
      axpy(-1.0, delta, trial);
      v = normalize_l2(clamp_positive(std::move(trial)), snap);
      prev_dir = std::move(delta);
      // Guard against repeated non-progress from nonlinear interference.
      if (defect >= stall_defect) {
        if (++stalls > 50) return result;
        if (stalls % 10 == 0) prev_dir.reset();
      } else {
        stalls = 0;
        stall_defect = defect;
      }
      continue;
    }

    // The EL gradient of E at normalized v is 2r, so the slope along -z
    // is -2<r,z>.
    double s = step * 2.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      ScalarField trial = v;
      axpy(-s, z, trial);
      trial = normalize_l2(clamp_positive(std::move(trial)), snap);
      const double e_trial = functional(p, trial);
      if (e_trial <= energy - 1e-4 * s * slope) {
        v = std::move(trial);
        energy = e_trial;
        step = s;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) return result;
  }
  return result;
}

LogSobolevSolution solve_vproblem(const VProblem& p, double t_report,
                                  const LogSobolevOptions& options,
                                  bool precondition, int max_iterations,
                                  double defect_tol) {
  const GeometrySnapshot& snap = *p.snap;
  std::vector<StartResult> converged;
  std::optional<StartResult> last;

  for (int start = 0; start <= options.restarts; ++start) {
    ScalarField v0(snap.grid_ptr());
    if (start == 0) {
      for (auto& x : v0.values()) x = 1.0;
    } else {
      // Random smooth positive start. Odd restarts add a concentrated bump
      // of random width down to the diffusion scale sqrt(T)/2, so the
      // small-t Gaussian branch is reachable from the restart set.
      std::mt19937_64 rng(options.seed + 7919ULL * start);
      std::uniform_real_distribution<double> amp(-0.5, 0.5);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const Grid& grid = snap.grid();
      std::vector<std::array<double, 2>> coef;
      for (int a = 0; a < grid.dim(); ++a)
        for (int k = 1; k <= 3; ++k) coef.push_back({amp(rng), amp(rng)});
      double bump_amp = 0.0;
      std::array<double, 3> center{0.0, 0.0, 0.0};
      if (start % 2 == 1) {
        const double a_max = std::max(2.0, 2.0 / p.T);
        bump_amp = std::exp(std::log(0.5) +
                            unit(rng) * (std::log(a_max) - std::log(0.5)));
        for (int a = 0; a < grid.dim(); ++a)
          center[a] = unit(rng) * grid.period(a);
      }
      for (std::size_t node = 0; node < grid.size(); ++node) {
        double s = 0.0;
        int c = 0;
        for (int a = 0; a < grid.dim(); ++a)
          for (int k = 1; k <= 3; ++k) {
            const double arg =
                2.0 * M_PI * k * grid.coord(node, a) / grid.period(a);
            s += coef[c][0] * std::cos(arg) + coef[c][1] * std::sin(arg);
            ++c;
          }
        for (int a = 0; a < grid.dim() && bump_amp > 0.0; ++a) {
          const double arg = 2.0 * M_PI *
                             (grid.coord(node, a) - center[a]) /
                             grid.period(a);
          s += bump_amp * (std::cos(arg) - 1.0);
        }
        v0[node] = std::exp(s);
      }
    }
    StartResult res =
        minimize_from(p, std::move(v0), precondition, max_iterations, defect_tol);
    last = res;
    if (res.converged) converged.push_back(std::move(res));
  }

  if (converged.empty()) {
    std::ostringstream os;
    os << "log-Sobolev solver did not converge: last defect " << last->defect
       << " after " << last->iterations << " iterations (tol " << defect_tol
       << ")";
    throw convergence_error(os.str());
  }

  // Smallest functional value wins; ties by distance to the uniform state.
  ScalarField uniform(snap.grid_ptr());
  for (auto& x : uniform.values()) x = 1.0;
  uniform = normalize_l2(uniform, snap);
  auto dist_uniform = [&](const ScalarField& v) {
    ScalarField d = v - uniform;
    return std::sqrt(inner_mu(d, d, snap));
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < converged.size(); ++i) {
    if (converged[i].mu < converged[best].mu - 1e-7 ||
        (std::abs(converged[i].mu - converged[best].mu) <= 1e-7 &&
         dist_uniform(converged[i].v) < dist_uniform(converged[best].v)))
      best = i;
  }
  double mu_min = converged[0].mu, mu_max = converged[0].mu;
  for (const auto& r : converged) {
    mu_min = std::min(mu_min, r.mu);
    mu_max = std::max(mu_max, r.mu);
  }

  // u = v / sqrt(c), log c = log_weight
  const double scale = std::exp(-0.5 * p.log_weight);
  LogSobolevSolution sol{t_report,
                         converged[best].mu + p.log_weight,
                         scale * converged[best].v,
                         converged[best].defect,
                         converged[best].iterations,
                         (mu_max - mu_min) > 1e-7,
                         options.seed};
  if (!(sol.minimizer.min() > 0.0))
    throw convergence_error("log-Sobolev: minimizer is not strictly positive");
  return sol;
}

VProblem plain_problem(const SnapshotPtr& snap, double t, double m,
                       double coeff) {
  if (!(t > 0.0)) throw parameter_error("log-Sobolev: t must be > 0");
  if (!(m >= snap->dim()))
    throw parameter_error("log-Sobolev: m must be >= dim");
  VProblem p;
  p.snap = snap;
  p.T = 4.0 * t;
  p.c0 = coeff;
  p.log_weight = -0.5 * m * std::log(4.0 * M_PI * t);
  return p;
}

}  // namespace

LogSobolevSolution solve_mu(const SnapshotPtr& snap, double t, double m,
                            const LogSobolevOptions& options) {
  VProblem p = plain_problem(snap, t, m, m);
  return solve_vproblem(p, t, options, true, options.max_iterations,
                        options.defect_tol);
}

LogSobolevSolution solve_mu_K(const SnapshotPtr& snap, double t, double m,
                              double K, const LogSobolevOptions& options) {
  if (K < 0.0) throw parameter_error("solve_mu_K: K must be >= 0");
  const double coeff = m * (1.0 + 0.5 * K * t) * (1.0 + 0.5 * K * t);
  VProblem p = plain_problem(snap, t, m, coeff);
  return solve_vproblem(p, t, options, true, options.max_iterations,
                        options.defect_tol);
}

LogSobolevSolution solve_mu_lott(const SnapshotPtr& snap, double tau, double q,
                                 const LogSobolevOptions& options,
                                 double rq_shift) {
  if (!(tau > 0.0)) throw parameter_error("solve_mu_lott: tau must be > 0");
  const int n = snap->dim();
  VProblem p;
  p.snap = snap;
  p.T = 4.0 * tau;
  p.c0 = n + q;
  p.log_weight = -0.5 * (n + q) * std::log(4.0 * M_PI * tau);
  ScalarField v = warped_scalar_curvature(WarpedSpec(snap, q));
  p.V = tau * map(v, [rq_shift](double x) { return x + rq_shift; });
  return solve_vproblem(p, tau, options, true, options.max_iterations,
                        options.defect_tol);
}

LogSobolevSolution solve_mu_bruteforce(const SnapshotPtr& snap, double t,
                                       double m, int restarts,
                                       unsigned long long seed,
                                       int max_iterations) {
  VProblem p = plain_problem(snap, t, m, m);
  LogSobolevOptions options;
  options.restarts = restarts;
  options.seed = seed;
  // Plain projected gradient, no preconditioner; the functional value near
  // the minimum is quadratically insensitive to the remaining defect.
  return solve_vproblem(p, t, options, false, max_iterations, 2e-4);
}

LogSobolevSolution solve_mu_lott_bruteforce(const SnapshotPtr& snap,
                                            double tau, double q,
                                            int restarts,
                                            unsigned long long seed,
                                            int max_iterations) {
  if (!(tau > 0.0))
    throw parameter_error("solve_mu_lott_bruteforce: tau must be > 0");
  const int n = snap->dim();
  VProblem p;
  p.snap = snap;
  p.T = 4.0 * tau;
  p.c0 = n + q;
  p.log_weight = -0.5 * (n + q) * std::log(4.0 * M_PI * tau);
  ScalarField v = warped_scalar_curvature(WarpedSpec(snap, q));
  p.V = tau * v;
  LogSobolevOptions options;
  options.restarts = restarts;
  options.seed = seed;
  return solve_vproblem(p, tau, options, false, max_iterations, 2e-4);
}

double lsi_functional(const SnapshotPtr& snap, double t, double m,
                      const ScalarField& u) {
  VProblem p = plain_problem(snap, t, m, m);
  const double c = std::exp(p.log_weight);
  ScalarField v = clamp_positive(std::sqrt(c) * u);
  return functional(p, v) + p.log_weight * inner_mu(v, v, *snap);
}

double lsi_constraint(const SnapshotPtr& snap, double t, double m,
                      const ScalarField& u) {
  const double c = std::pow(4.0 * M_PI * t, -0.5 * m);
  return c * inner_mu(u, u, *snap);
}

MuMonotonicity mu_monotonicity(const MetricSchedule& schedule,
                               const std::vector<double>& times, double m,
                               double K, const LogSobolevOptions& options) {
  MuMonotonicity out;
  out.times = times;
  out.certified = true;
  const int n = schedule.grid()->dim();
  for (double t : times) {
    // At m = n the tensor Ric_{m,n}(L) only exists for spatially constant
    // potentials, where it coincides with Ric(L); otherwise the
    // certificate is withheld.
    double m_used = m;
    if (!(m > n)) {
      SnapshotPtr snap = schedule.snapshot_at(t);
      double grad_max = 0.0;
      for (int a = 0; a < n; ++a) {
        ScalarField d = spectral_derivative(snap->potential(), a);
        grad_max = std::max(grad_max,
                            std::max(std::abs(d.min()), std::abs(d.max())));
      }
      if (grad_max > 1e-10) {
        out.certified = false;
        continue;
      }
      m_used = std::numeric_limits<double>::infinity();
    }
    ScalarField defect = super_ricci_defect(schedule, m_used, K, t);
    if (defect.min() < -1e-10) out.certified = false;
  }
  for (double t : times) {
    LogSobolevSolution sol = solve_mu_K(schedule.snapshot_at(t), t, m, K,
                                        options);
    out.mu.push_back(sol.mu);
  }
  if (!out.certified) {
    out.verdict = Verdict::not_applicable;
    return out;
  }
  out.verdict = Verdict::pass;
  for (std::size_t i = 1; i < out.mu.size(); ++i)
    if (out.mu[i] > out.mu[i - 1] + 1e-7) out.verdict = Verdict::fail;
  return out;
}

}  // namespace geoflow
