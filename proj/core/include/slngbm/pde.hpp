#pragma once

#include <functional>

namespace slngbm {

/// Standard normal cumulative distribution function (erfc based).
double phi(double x);

/// Terminal profile for the truncated-expectation observable: identically 1
/// left of sigma_star, identically 0 right of sigma_star + 1, and a quintic
/// smoothstep 1 - (6x^5 - 15x^4 + 10x^3) across the unit ramp. C^2, values
/// in [0, 1], |second derivative| <= 6 everywhere.
class TerminalCondition {
 public:
  explicit TerminalCondition(double sigma_star);

  double sigma_star() const { return sigma_star_; }
  double value(double sigma_hat) const;
  double d1(double sigma_hat) const;
  double d2(double sigma_hat) const;

  // Closed-form extrema of the ramp derivatives: max|d1| = 15/8 at the
  // midpoint, max|d2| = 10 sqrt(3)/3.
  static double sup_d1_terminal() { return 1.875; }
  static double sup_d2_terminal() { return 5.7735026918962576; }

 private:
  double sigma_star_;
};

/// Backward solution of
///   dzeta/dtau + (2/(n+2)) dzeta/dsigma + (2/(n+2)) d2zeta/dsigma2 = 0
/// with terminal data at tau_star, evaluated by exact Gaussian convolution:
/// a Phi term for the constant region plus Gauss-Legendre panels across the
/// unit ramp. Absolute accuracy ~1e-12, well inside the 1e-10 budget.
///
/// Convention: the evaluation point is shifted by +(2/(n+2))(tau_star-tau)
/// inside the terminal argument, which reproduces the comparison bound
/// zeta(tau, s) <= Phi((sigma*+1-s-(2/(n+2))(tau*-tau)) / sqrt((4/(n+2))(tau*-tau))).
class BackwardSolution {
 public:
  BackwardSolution(int n, double tau_star, TerminalCondition terminal);

  int n() const { return n_; }
  double tau_star() const { return tau_star_; }
  const TerminalCondition& terminal() const { return terminal_; }

  double value(double tau, double sigma_hat) const;
  double d1(double tau, double sigma_hat) const;
  double d2(double tau, double sigma_hat) const;

  /// The comparison-principle envelope Phi(...) described above.
  double phi_bound(double tau, double sigma_hat) const;

 private:
  double ramp_integral(double tau, double sigma_hat, int derivative_order) const;
  void check_tau(double tau) const;

  int n_;
  double tau_star_;
  TerminalCondition terminal_;
  double drift_;  // 2/(n+2)
  double diff_;   // 4/(n+2), variance per unit backward time
};

double solve_backward(int n, double tau_star, const TerminalCondition& terminal, double tau,
                      double sigma_hat);

/// Numerically maximized |d1|, |d2| and |d1 + d2| over a sigma grid that
/// spans the effective support (ramp center +- 8 standard deviations).
struct DerivativeSup {
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double sup_sum = 0.0;  // sup |d1 + d2|, the Lemma-7 integrand
};

DerivativeSup derivative_sup(int n, double tau_star, const TerminalCondition& terminal,
                             double tau);

/// Integral bound int_0^{tau*} e^{-tau'/(n-1)} sup|d1 + d2|(tau') dtau'
/// by adaptive Simpson quadrature; note 1 - lambda2/2 = 1/(n-1).
double lemma7_bound(int n, double tau_star, const TerminalCondition& terminal);

/// Same integral with an arbitrary sup envelope, for stubbed cross-checks.
double lemma7_bound(int n, double tau_star, const std::function<double(double)>& sup_at_tau);

/// Threshold exponent of the truncated functional: sigma* = 2 tau*/(n+2) - 1,
/// the largest choice that keeps the initial value at or below 1/2.
double prop2_sigma_star(int n, double tau_star);

}  // namespace slngbm
