#pragma once

#include <vector>

#include "geoflow/heat.hpp"
#include "geoflow/lott.hpp"
#include "geoflow/schedule.hpp"

namespace geoflow {

struct EntropyOptions {
  /// Ratio-route mask: nodes with u < mask_rel * max(u) contribute zero to
  /// the gradient/Hessian integrands (their true contribution is below the
  /// residual floor; the ratio there would amplify rounding instead).
  double mask_rel = 1e-5;
};

/// Pointwise derivatives of log u against a snapshot.
///
/// Route selection: when u is strictly positive with a representable
/// dynamic range, log u is differentiated spectrally (the accurate path).
/// When u underflows somewhere (near-kernel data on large tori), log u has
/// unresolvable kinks, so the quadratic forms switch to masked ratios of
/// spectral derivatives of u itself.
struct LogDerivatives {
  ScalarField log_u;        // log of max(u, tiny), for u log u integrands
  VectorField grad_cov;     // covariant d_i log u (zero outside the mask)
  SymTensorField hess;      // covariant Hessian of log u
  ScalarField grad_sq;      // |grad log u|^2 (raised with g^{-1})
  ScalarField mask;         // 1 on reliable nodes, 0 outside
  bool ratio_route = false;
};

LogDerivatives log_derivatives(const GeometrySnapshot& snap,
                               const ScalarField& u,
                               const EntropyOptions& options = {});

/// int |grad log u|^2 u dmu. On the log route this is the direct integral;
/// on the ratio route it is evaluated as 4 int |grad sqrt(u)|^2 dmu, whose
/// integrand needs half the spectral resolution of u and no division.
double dirichlet_form(const GeometrySnapshot& snap, const ScalarField& u,
                      const LogDerivatives& ld);

// --- entropy functionals -------------------------------------------------

/// H = -int u log u dmu (x log x extended by 0 at 0).
double shannon_entropy(const FlowState& state,
                       const EntropyOptions& options = {});
/// H_m = H - (m/2)(1 + log 4 pi t).
double entropy_Hm(const FlowState& state, double m,
                  const EntropyOptions& options = {});
/// H_{m,K} = H_m - (m/2) K t (1 + K t / 6).
double entropy_HmK(const FlowState& state, double m, double K,
                   const EntropyOptions& options = {});

/// W = int [t |grad log u|^2 - log u] u dmu  ( = d/dt (tH) along the flow).
double w_entropy(const FlowState& state, const EntropyOptions& options = {});
/// W_m = W - (m/2)(2 + log 4 pi t).
double w_entropy_m(const FlowState& state, double m,
                   const EntropyOptions& options = {});
/// W_{m,K} = W_m - m (K t + K^2 t^2 / 4).
double w_entropy_mK(const FlowState& state, double m, double K,
                    const EntropyOptions& options = {});

// --- closed-form dissipation right-hand sides ----------------------------

/// dH/dt = int |grad log u|^2 u dmu.
double dH_rhs(const FlowState& state, const EntropyOptions& options = {});

/// d2H/dt2 = -2 int [ |Hess log u|^2
///                    + ((1/2) dg/dt + Ric(L))(grad log u, grad log u) ] u dmu.
double d2H_rhs(const FlowState& state, const MetricSchedule& schedule,
               const EntropyOptions& options = {});

/// dW/dt = -2 int t [ ... Ric(L) form ... ] u dmu + 2 int |grad log u|^2 u dmu.
double dW_rhs(const FlowState& state, const MetricSchedule& schedule,
              const EntropyOptions& options = {});

/// dW_m/dt = -2t int |Hess log u + g/2t|^2 u dmu
///           - (2t/(m-n)) int (grad phi . grad log u - (m-n)/2t)^2 u dmu
///           - 2t int ((1/2) dg/dt + Ric_{m,n}(L))(grad log u, grad log u) u dmu.
double dWm_rhs(const FlowState& state, const MetricSchedule& schedule, double m,
               const EntropyOptions& options = {});

/// Same with the (1/2t + K/2) shifts and Ric_{m,n}(L) + K g.
double dWmK_rhs(const FlowState& state, const MetricSchedule& schedule,
                double m, double K, const EntropyOptions& options = {});

// --- residual report ------------------------------------------------------

struct EntropyRow {
  double t = 0.0;
  double mass = 0.0;
  double H = 0.0, Hm = 0.0, HmK = 0.0;
  double W = 0.0, Wm = 0.0, WmK = 0.0;
  // finite-difference left-hand sides (NaN where the stencil does not fit)
  double dH_fd = 0.0;
  double d2H_fd_plain = 0.0, d2H_fd_rich = 0.0;
  double dWm_fd_plain = 0.0, dWm_fd_rich = 0.0;
  double dWmK_fd_plain = 0.0, dWmK_fd_rich = 0.0;
  // closed-form right-hand sides
  double dH_rhs = 0.0;
  double d2H_rhs = 0.0;
  double dWm_rhs = 0.0;
  double dWmK_rhs = 0.0;
  // pointwise defect minima at this time
  double defect_m = 0.0;    // (1/2) dg/dt + Ric_{m,n}(L)
  double defect_mK = 0.0;   // ... + K g
  double defect_ricL = 0.0; // (1/2) dg/dt + Ric(L)
};

enum class Verdict { pass, fail, not_applicable };

/// Residuals are recomputed from the stored sides, never stored.
class EntropyReport {
 public:
  double m = 0.0, K = 0.0;
  std::vector<EntropyRow> rows;

  bool certified_m = false;    // super-flow defect >= -1e-10 at all times
  bool certified_mK = false;
  bool certified_ricL = false;

  Verdict wm_monotone = Verdict::not_applicable;
  Verdict wmK_monotone = Verdict::not_applicable;
  Verdict h_concave = Verdict::not_applicable;

  static double residual(double lhs, double rhs) { return lhs - rhs; }
  static double rel_residual(double lhs, double rhs);

  /// Largest Richardson-extrapolated relative residual over interior rows.
  double max_rel_d2H() const;
  double max_rel_dWm() const;
  double max_rel_dWmK() const;
  /// Same with the plain second-order stencils (convergence-order studies).
  double max_rel_d2H_plain() const;
  double max_rel_dWm_plain() const;
};

/// Assemble the full report for a trajectory with uniformly spaced outputs
/// (>= 3 required; >= 5 for the Richardson columns).
EntropyReport formula_residuals(const FlowTrajectory& trajectory,
                                const MetricSchedule& schedule, double m,
                                double K, const EntropyOptions& options = {});

// --- Harnack ---------------------------------------------------------------

struct HarnackCertificate {
  double t = 0.0;
  double m = 0.0, K = 0.0;
  double max_defect = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
  double coverage = 1.0;  // fraction of nodes where u admits the ratios
};

/// Pointwise defect of |grad u|^2/u^2 - (1 + (2/3)Kt) (Lu/u)
///   <= m/2t + (mK/2)(1 + Kt/3), with d_t u evaluated as Lu.
/// Requires m >= dim (the bound itself is regular at m = n).
HarnackCertificate harnack_defect(const FlowState& state, double m, double K,
                                  double tolerance = 1e-6);

// --- W-entropy along the Lott flow ----------------------------------------

/// W_q = int [tau (|grad eta|^2 + R_q) + eta - (n+q)] phi dmu, with
/// eta = -log phi - ((n+q)/2) log(4 pi tau) and dmu = e^{-psi} dvol.
/// Requires int phi dmu = 1 within 1e-6.
double wq_entropy(const SnapshotPtr& snap, double q, const ScalarField& phi,
                  double tau);

/// dW_q/dtau = -2 tau int [ |Ric_psi^q + Hess eta - g/2tau|^2
///   + (1/q)(Delta psi - |grad psi|^2 - <grad psi, grad eta> - q/2tau)^2 ] phi dmu.
double dWq_rhs(const SnapshotPtr& snap, double q, const ScalarField& phi,
               double tau);

struct WqSeries {
  std::vector<double> taus;
  std::vector<double> wq;
  std::vector<double> dwq_fd_plain, dwq_fd_rich, dwq_rhs;  // NaN off-stencil
  Verdict monotone = Verdict::not_applicable;  // W_q non-increasing in tau
  double max_rel_residual = 0.0;               // Richardson, interior
};

WqSeries wq_series(const ConjugateTrajectory& conj);

}  // namespace geoflow
