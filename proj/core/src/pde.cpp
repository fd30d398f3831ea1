#include "slngbm/pde.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace slngbm {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// 32-point Gauss-Legendre nodes/weights on [-1, 1], Newton on the
// three-term recurrence; computed once.
struct GaussLegendre32 {
  std::array<double, 32> x{};
  std::array<double, 32> w{};
  GaussLegendre32() {
    const int n = 32;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[n - 1 - i] = w[i];
    }
  }
};

const GaussLegendre32& gl32() {
  static const GaussLegendre32 table;
  return table;
}

double smoothstep(double x) { return ((6.0 * x - 15.0) * x + 10.0) * x * x * x; }
double smoothstep_d1(double x) { return ((30.0 * x - 60.0) * x + 30.0) * x * x; }
double smoothstep_d2(double x) { return ((120.0 * x - 180.0) * x + 60.0) * x; }

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double phi(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("phi: non-finite argument");
  return 0.5 * std::erfc(-x / kSqrt2);
}

TerminalCondition::TerminalCondition(double sigma_star) : sigma_star_(sigma_star) {
  if (!std::isfinite(sigma_star)) throw std::invalid_argument("TerminalCondition: sigma_star must be finite");
}

double TerminalCondition::value(double sigma_hat) const {
  const double x = sigma_hat - sigma_star_;
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return 1.0 - smoothstep(x);
}

double TerminalCondition::d1(double sigma_hat) const {
  const double x = sigma_hat - sigma_star_;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -smoothstep_d1(x);
}

double TerminalCondition::d2(double sigma_hat) const {
  const double x = sigma_hat - sigma_star_;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -smoothstep_d2(x);
}

BackwardSolution::BackwardSolution(int n, double tau_star, TerminalCondition terminal)
    : n_(n), tau_star_(tau_star), terminal_(terminal) {
  if (n < 2) throw std::domain_error("BackwardSolution: n must be >= 2");
  if (!(tau_star >= 0.0)) throw std::invalid_argument("BackwardSolution: tau_star must be >= 0");
  drift_ = 2.0 / (n + 2);
  diff_ = 4.0 / (n + 2);
}

void BackwardSolution::check_tau(double tau) const {
  if (!(tau >= 0.0 && tau <= tau_star_))
    throw std::invalid_argument("BackwardSolution: tau must lie in [0, tau_star]");
}

// Integral over the unit ramp of (order-th derivative of the terminal)
// against the Gaussian kernel N(.; mean, sd). The window is clipped to
// +-12 sd around the kernel mean and split into panels no wider than 4 sd,
// so the 32-point rule is effectively exact on every panel.
double BackwardSolution::ramp_integral(double tau, double sigma_hat, int order) const {
  const double s = tau_star_ - tau;
  const double mean = sigma_hat + drift_ * s;
  const double sd = std::sqrt(diff_ * s);
  const double s_star = terminal_.sigma_star();

  double lo = std::max(s_star, mean - 12.0 * sd);
  double hi = std::min(s_star + 1.0, mean + 12.0 * sd);
  if (!(hi > lo)) return 0.0;

  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / (4.0 * sd))));
  const auto& gl = gl32();
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + (hi - lo) * p / panels;
    const double b = lo + (hi - lo) * (p + 1) / panels;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (int i = 0; i < 32; ++i) {
      const double y = mid + half * gl.x[i];
      const double z = (y - mean) / sd;
      const double kernel = kInvSqrt2Pi * std::exp(-0.5 * z * z) / sd;
      const double u = y - s_star;
      double g = 0.0;
      if (order == 0)
        g = 1.0 - smoothstep(u);
      else if (order == 1)
        g = -smoothstep_d1(u);
      else
        g = -smoothstep_d2(u);
      acc += gl.w[i] * g * kernel;
    }
    total += acc * half;
  }
  return total;
}

double BackwardSolution::value(double tau, double sigma_hat) const {
  check_tau(tau);
  const double s = tau_star_ - tau;
  const double sd = std::sqrt(diff_ * s);
  // Below sd ~ 1e-8 the kernel is a delta to within the accuracy budget;
  // this also caps the panel count in the ramp quadrature.
  if (sd < 1e-8) return terminal_.value(sigma_hat + drift_ * s);
  const double mean = sigma_hat + drift_ * s;
  // Mass left of the ramp contributes exactly Phi; right of it, zero.
  const double left = phi((terminal_.sigma_star() - mean) / sd);
  return left + ramp_integral(tau, sigma_hat, 0);
}

double BackwardSolution::d1(double tau, double sigma_hat) const {
  check_tau(tau);
  const double s = tau_star_ - tau;
  if (std::sqrt(diff_ * s) < 1e-8) return terminal_.d1(sigma_hat + drift_ * s);
  return ramp_integral(tau, sigma_hat, 1);
}

double BackwardSolution::d2(double tau, double sigma_hat) const {
  check_tau(tau);
  const double s = tau_star_ - tau;
  if (std::sqrt(diff_ * s) < 1e-8) return terminal_.d2(sigma_hat + drift_ * s);
  return ramp_integral(tau, sigma_hat, 2);
}

double BackwardSolution::phi_bound(double tau, double sigma_hat) const {
  check_tau(tau);
  const double s = tau_star_ - tau;
  if (s == 0.0) return sigma_hat <= terminal_.sigma_star() + 1.0 ? 1.0 : 0.0;
  const double sd = std::sqrt(diff_ * s);
  return phi((terminal_.sigma_star() + 1.0 - sigma_hat - drift_ * s) / sd);
}

double solve_backward(int n, double tau_star, const TerminalCondition& terminal, double tau,
                      double sigma_hat) {
  return BackwardSolution(n, tau_star, terminal).value(tau, sigma_hat);
}

DerivativeSup derivative_sup(int n, double tau_star, const TerminalCondition& terminal,
                             double tau) {
  BackwardSolution solution(n, tau_star, terminal);
  const double s = tau_star - tau;
  DerivativeSup out;
  if (s == 0.0) {
    out.sup_d1 = TerminalCondition::sup_d1_terminal();
    out.sup_d2 = TerminalCondition::sup_d2_terminal();
    // d1 and d2 of the ramp overlap; scan for the sum's extremum.
    double best = 0.0;
    for (int i = 0; i <= 4096; ++i) {
      const double x = terminal.sigma_star() + i / 4096.0;
      best = std::max(best, std::abs(terminal.d1(x) + terminal.d2(x)));
    }
    out.sup_sum = best;
    return out;
  }
  const double sd = std::sqrt(4.0 / (n + 2) * s);
  const double drift = 2.0 / (n + 2) * s;
  // Derivatives live where the kernel centered at sigma + drift meets the
  // ramp: sigma in [sigma* - drift - 8 sd - 1, sigma* - drift + 8 sd + 1].
  const double center = terminal.sigma_star() - drift + 0.5;
  const double halfwidth = 8.0 * sd + 1.0;
  const int grid = 2048;
  const double step = 2.0 * halfwidth / grid;
  for (int i = 0; i <= grid; ++i) {
    const double sigma = center - halfwidth + i * step;
    const double g1 = solution.d1(tau, sigma);
    const double g2 = solution.d2(tau, sigma);
    out.sup_d1 = std::max(out.sup_d1, std::abs(g1));
    out.sup_d2 = std::max(out.sup_d2, std::abs(g2));
    out.sup_sum = std::max(out.sup_sum, std::abs(g1 + g2));
  }
  return out;
}

double lemma7_bound(int n, double tau_star, const TerminalCondition& terminal) {
  return lemma7_bound(n, tau_star, [&](double tau_prime) {
    return derivative_sup(n, tau_star, terminal, tau_prime).sup_sum;
  });
}

double lemma7_bound(int n, double tau_star, const std::function<double(double)>& sup_at_tau) {
  if (n < 2) throw std::domain_error("lemma7_bound: n must be >= 2");
  if (!(tau_star >= 0.0)) throw std::invalid_argument("lemma7_bound: tau_star must be >= 0");
  if (tau_star == 0.0) return 0.0;
  const double rate = 1.0 / (n - 1);  // 1 - lambda2/2
  auto integrand = [&](double tau_prime) {
    return std::exp(-rate * tau_prime) * sup_at_tau(tau_prime);
  };
  return integrate_adaptive(integrand, 0.0, tau_star, 1e-9);
}

double prop2_sigma_star(int n, double tau_star) {
  if (n < 2) throw std::domain_error("prop2_sigma_star: n must be >= 2");
  return 2.0 * tau_star / (n + 2) - 1.0;
}

}  // namespace slngbm
