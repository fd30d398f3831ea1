#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "slngbm/pde.hpp"

using namespace slngbm;

namespace {

// Dense-Simpson oracle for the convolution value, independent of the
// production quadrature split.
double brute_force_value(int n, double tau_star, const TerminalCondition& terminal, double tau,
                         double sigma_hat) {
  const double s = tau_star - tau;
  if (s == 0.0) return terminal.value(sigma_hat);
  const double mean = sigma_hat + 2.0 / (n + 2) * s;
  const double sd = std::sqrt(4.0 / (n + 2) * s);
  const double lo = mean - 14.0 * sd, hi = mean + 14.0 * sd;
  const int steps = 200001;  // odd count for Simpson
  const double h = (hi - lo) / (steps - 1);
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = lo + i * h;
    const double z = (x - mean) / sd;
    const double w = (i == 0 || i == steps - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * terminal.value(x) * std::exp(-0.5 * z * z);
  }
  return acc * h / 3.0 / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST_CASE("phi: frozen high-precision values") {
  CHECK(phi(0.0) == 0.5);
  CHECK(std::abs(phi(-0.25) - 0.40129367431707628) <= 1e-12);
  CHECK(std::abs(phi(6.0) - 0.99999999901341235) <= 1e-12);
  CHECK(std::abs((1.0 - phi(6.0)) - 9.8658764503769814e-10) <= 1e-12);
  CHECK(std::abs(phi(-1.0) - 0.15865525393145705) <= 1e-12);
  CHECK_THROWS(phi(std::nan("")));
}

TEST_CASE("terminal condition: plateaus, ramp, smoothness, derivative extrema") {
  const TerminalCondition terminal(2.0);
  CHECK(terminal.value(-3.0) == 1.0);
  CHECK(terminal.value(2.0) == 1.0);
  CHECK(terminal.value(3.0) == 0.0);
  CHECK(terminal.value(10.0) == 0.0);
  CHECK(terminal.value(2.5) == doctest::Approx(0.5));
  for (double x : {-1.0, 2.0, 2.3, 2.9, 3.0, 4.0}) {
    CHECK(terminal.value(x) >= 0.0);
    CHECK(terminal.value(x) <= 1.0);
    CHECK(std::abs(terminal.d2(x)) <= 6.0);
  }
  // C2 joints: derivatives vanish at both ramp ends
  CHECK(terminal.d1(2.0) == 0.0);
  CHECK(terminal.d1(3.0) == 0.0);
  CHECK(terminal.d2(2.0) == 0.0);
  CHECK(terminal.d2(3.0) == 0.0);
  CHECK(terminal.d1(2.5) == doctest::Approx(-1.875));
  // |d2| peaks at 10 sqrt(3)/3
  double peak = 0.0;
  for (int i = 0; i <= 2000; ++i) peak = std::max(peak, std::abs(terminal.d2(2.0 + i / 2000.0)));
  CHECK(peak == doctest::Approx(5.7735026918962576).epsilon(1e-6));
}

TEST_CASE("backward solution: terminal recovery and the far-left limit") {
  const TerminalCondition terminal(1.0);
  const BackwardSolution solution(3, 5.0, terminal);
  for (double s : {-2.0, 1.2, 1.7, 2.5}) CHECK(solution.value(5.0, s) == terminal.value(s));
  // entire kernel mass sits in the value-1 plateau
  CHECK(std::abs(solution.value(4.0, 1.0 - 50.0) - 1.0) <= 1e-10);
  CHECK(std::abs(solution.value(4.0, 1.0 + 50.0) - 0.0) <= 1e-10);
  CHECK_THROWS(solution.value(-0.1, 0.0));
  CHECK_THROWS(solution.value(5.1, 0.0));
}

TEST_CASE("backward solution matches a dense-quadrature oracle to 1e-10") {
  const int n = 3;
  const double tau_star = 20.0;
  const TerminalCondition terminal(prop2_sigma_star(n, tau_star));
  const BackwardSolution solution(n, tau_star, terminal);
  for (double tau : {0.0, 10.0, 19.5, 19.999}) {
    for (double sigma : {-3.0, 0.0, 2.0, 7.0}) {
      const double fast = solution.value(tau, sigma);
      const double brute = brute_force_value(n, tau_star, terminal, tau, sigma);
      CHECK(std::abs(fast - brute) <= 1e-10);
    }
  }
}

TEST_CASE("initial value sits at or below one half for the threshold choice") {
  for (int n : {2, 3}) {
    for (double tau_star : {10.0, 20.0, 40.0}) {
      const TerminalCondition terminal(prop2_sigma_star(n, tau_star));
      const double value = solve_backward(n, tau_star, terminal, 0.0, 0.0);
      CHECK(value <= 0.5 + 1e-9);
      CHECK(value > 0.25);  // sanity: not degenerate
    }
  }
}

TEST_CASE("maximum principle, monotonicity and the comparison envelope") {
  const int n = 3;
  const double tau_star = 10.0;
  const TerminalCondition terminal(prop2_sigma_star(n, tau_star));
  const BackwardSolution solution(n, tau_star, terminal);
  for (double tau : {0.0, 5.0, 9.0}) {
    double prev = 2.0;
    for (int i = 0; i <= 200; ++i) {
      const double sigma = -12.0 + 24.0 * i / 200.0;
      const double v = solution.value(tau, sigma);
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(v <= prev + 1e-12);  // nonincreasing in sigma
      prev = v;
      CHECK(v <= solution.phi_bound(tau, sigma) + 1e-9);
    }
  }
}

TEST_CASE("derivatives: kernel-differentiated values against finite differences") {
  const int n = 3;
  const double tau_star = 8.0;
  const TerminalCondition terminal(1.5);
  const BackwardSolution solution(n, tau_star, terminal);
  const double h = 1e-5;
  for (double tau : {0.0, 6.0}) {
    for (double sigma : {0.5, 1.5, 2.5}) {
      const double d1 = solution.d1(tau, sigma);
      const double fd1 =
          (solution.value(tau, sigma + h) - solution.value(tau, sigma - h)) / (2.0 * h);
      CHECK(d1 == doctest::Approx(fd1).epsilon(1e-5));
      const double d2 = solution.d2(tau, sigma);
      const double fd2 = (solution.value(tau, sigma + h) - 2.0 * solution.value(tau, sigma) +
                          solution.value(tau, sigma - h)) /
                         (h * h);
      CHECK(d2 == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("derivative sups: terminal extrema, Gaussian decay, monotone smoothing") {
  const int n = 3;
  const double tau_star = 100.0;
  const TerminalCondition terminal(prop2_sigma_star(n, tau_star));

  const DerivativeSup at_terminal = derivative_sup(n, tau_star, terminal, tau_star);
  CHECK(at_terminal.sup_d1 == doctest::Approx(1.875));
  CHECK(at_terminal.sup_d2 == doctest::Approx(5.7735026918962576));
  CHECK(at_terminal.sup_d2 <= 6.0);

  // backward gap of 100: unit-total-variation convolution decay
  const DerivativeSup far = derivative_sup(n, tau_star, terminal, 0.0);
  CHECK(far.sup_d1 <= 1.5 / std::sqrt(101.0));
  CHECK(far.sup_d2 <= 6.0 / 101.0);

  double prev_d1 = 1e300, prev_d2 = 1e300;
  for (double gap : {0.0, 0.5, 2.0, 10.0, 50.0}) {
    const DerivativeSup sup = derivative_sup(n, tau_star, terminal, tau_star - gap);
    CHECK(sup.sup_d1 <= prev_d1 + 1e-12);
    CHECK(sup.sup_d2 <= prev_d2 + 1e-12);
    prev_d1 = sup.sup_d1;
    prev_d2 = sup.sup_d2;
  }
}

TEST_CASE("lemma-7 integral: stub closed form, empty horizon, stability") {
  // constant sup == 1 has the closed form (n-1)(1 - e^{-tau*/(n-1)})
  const double stub = lemma7_bound(3, 20.0, [](double) { return 1.0; });
  CHECK(std::abs(stub - 1.999909200140475) <= 1e-9);
  const double stub2 = lemma7_bound(5, 8.0, [](double) { return 1.0; });
  CHECK(std::abs(stub2 - 4.0 * (1.0 - std::exp(-2.0))) <= 1e-9);

  const TerminalCondition terminal(prop2_sigma_star(3, 0.0));
  CHECK(lemma7_bound(3, 0.0, terminal) == 0.0);

  // fixed-grid Simpson cross-check: the adaptive quadrature is converged
  const TerminalCondition t20(prop2_sigma_star(3, 20.0));
  const double bound = lemma7_bound(3, 20.0, t20);
  CHECK(bound > 0.0);
  auto integrand = [&](double tau) {
    return std::exp(-tau / 2.0) * derivative_sup(3, 20.0, t20, tau).sup_sum;
  };
  const int steps = 201;
  const double h = 20.0 / (steps - 1);
  double simpson = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double w = (i == 0 || i == steps - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    simpson += w * integrand(i * h);
  }
  simpson *= h / 3.0;
  CHECK(bound == doctest::Approx(simpson).epsilon(1e-5));
}

TEST_CASE("prop2 threshold exponent") {
  CHECK(prop2_sigma_star(3, 20.0) == doctest::Approx(2.0 * 20.0 / 5.0 - 1.0));
  CHECK(prop2_sigma_star(2, 10.0) == doctest::Approx(4.0));
}
