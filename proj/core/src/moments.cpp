#include "slngbm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "slngbm/linalg.hpp"

namespace slngbm {

namespace {

double alpha(int n) { return static_cast<double>(n - 1) * static_cast<double>(n + 2); }

void check_np(int n, int p) {
  if (n < 2) throw std::domain_error("moment engine: n must be >= 2");
  if (p < 1 || p > max_partition_degree())
    throw std::invalid_argument("moment engine: p must be in 1..8");
}

Partition split_part(const Partition& base, int idx, int q) {
  Partition out = base;
  const int p_i = out.parts[idx];
  out.parts.erase(out.parts.begin() + idx);
  out.parts.push_back(q);
  out.parts.push_back(p_i - q);
  std::sort(out.parts.begin(), out.parts.end(), std::greater<int>());
  return out;
}

Partition merge_parts(const Partition& base, int i, int j) {
  Partition out = base;
  const int merged = out.parts[i] + out.parts[j];
  out.parts.erase(out.parts.begin() + j);  // j > i, erase the later one first
  out.parts.erase(out.parts.begin() + i);
  out.parts.push_back(merged);
  std::sort(out.parts.begin(), out.parts.end(), std::greater<int>());
  return out;
}

}  // namespace

double intermittency_exponent(int n, double p) {
  if (n < 2) throw std::domain_error("intermittency_exponent: n must be >= 2");
  if (p < 1.0) throw std::invalid_argument("intermittency_exponent: p must be >= 1");
  return p + 2.0 * p * (p - 1.0) / (n + 2);
}

double lambda1(int n) { return 2.0 + 4.0 / (n + 2); }
double lambda2(int n) { return 2.0 - 2.0 / (n - 1); }

int GeneratorMatrix::index_of(const Partition& part) const {
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i] == part) return static_cast<int>(i);
  throw std::logic_error("GeneratorMatrix: partition not in basis");
}

GeneratorMatrix generator_matrix(int n, int p) {
  check_np(n, p);
  GeneratorMatrix gen;
  gen.n = n;
  gen.p = p;
  gen.basis = partitions(p);
  const int dim = static_cast<int>(gen.basis.size());
  gen.entries.assign(dim, std::vector<double>(dim, 0.0));
  const double a = alpha(n);

  for (int row = 0; row < dim; ++row) {
    const Partition& lam = gen.basis[row];
    const int k = lam.count();
    for (int i = 0; i < k; ++i) {
      const double p_i = lam.parts[i];
      gen.entries[row][row] += p_i + p_i * (p_i - 1.0) * (n - 2) / a;
      for (int q = 1; q < lam.parts[i]; ++q) {
        const int col = gen.index_of(split_part(lam, i, q));
        gen.entries[row][col] += p_i * n / a;
      }
    }
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double w = 4.0 * lam.parts[i] * lam.parts[j] / a;
        const int col = gen.index_of(merge_parts(lam, i, j));
        gen.entries[row][col] += w * n;
        gen.entries[row][row] -= w;
      }
    }
  }
  return gen;
}

double MomentTable::value(const Partition& part) const {
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i] == part) return values[i];
  throw std::invalid_argument("MomentTable: partition " + part.to_string() + " not tabulated");
}

double MomentTable::tr_power() const { return values.front(); }
double MomentTable::tr_to_p() const { return values.back(); }

double max_admissible_tau(int n, int p) {
  // Keeps r(n,p)*tau + p*ln(n) below the double exponent range.
  return (700.0 - p * std::log(static_cast<double>(n))) / intermittency_exponent(n, p);
}

MomentTable exact_moments(int n, int p, double tau) {
  check_np(n, p);
  if (!(tau >= 0.0)) throw std::invalid_argument("exact_moments: tau must be >= 0");
  const double tau_max = max_admissible_tau(n, p);
  if (tau > tau_max)
    throw std::range_error("exact_moments: tau too large for n=" + std::to_string(n) +
                           ", p=" + std::to_string(p) +
                           "; maximal admissible tau is " + std::to_string(tau_max));

  const GeneratorMatrix gen = generator_matrix(n, p);
  const int dim = static_cast<int>(gen.basis.size());
  std::vector<double> v0(dim);
  for (int i = 0; i < dim; ++i) v0[i] = std::pow(static_cast<double>(n), gen.basis[i].count());

  MomentTable table;
  table.tau = tau;
  table.n = n;
  table.p = p;
  table.basis = gen.basis;
  table.values.assign(dim, 0.0);
  if (tau == 0.0) {
    table.values = v0;
    return table;
  }

  // Route 1: w = exp(tau * M) v0 by scaling-and-squaring.
  std::vector<double> m_tau(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m_tau[i * dim + j] = tau * gen.entries[i][j];
  std::vector<double> expm(m_tau.size()), s1(m_tau.size()), s2(m_tau.size());
  expm_into(m_tau.data(), expm.data(), 1e-13, dim, s1.data(), s2.data());
  std::vector<double> w_exp(dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) w_exp[i] += expm[i * dim + j] * v0[j];

  // Route 2: adaptive ODE integration of v' = M v, tight relative control.
  namespace odeint = boost::numeric::odeint;
  using state = std::vector<double>;
  auto rhs = [&gen, dim](const state& v, state& dv, double) {
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += gen.entries[i][j] * v[j];
      dv[i] = s;
    }
  };
  state v_ode = v0;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_cash_karp54<state>>(1e-300, 1e-13);
  odeint::integrate_adaptive(stepper, rhs, v_ode, 0.0, tau, std::min(tau, 1e-3));

  // Mutual agreement is held at 1e-10 throughout the working range; close
  // to the admissible edge (hundreds of e-folds) both routes lose digits to
  // conditioning, so the threshold widens there.
  const double efolds = intermittency_exponent(n, p) * tau;
  const double route_tol = efolds <= 220.0 ? 1e-10 : 1e-10 * std::pow(efolds / 220.0, 2.5);
  for (int i = 0; i < dim; ++i) {
    const double a = w_exp[i];
    const double b = v_ode[i];
    if (!std::isfinite(a) || !std::isfinite(b))
      throw std::range_error("exact_moments: overflow while propagating moments");
    if (std::abs(a - b) > route_tol * std::max(std::abs(a), std::abs(b)))
      throw std::runtime_error(
          "exact_moments: matrix-exponential and ODE routes disagree for " +
          gen.basis[i].to_string());
    table.values[i] = a;
    if (a < n * (1.0 - 1e-12))
      throw std::runtime_error("exact_moments: moment value below its n floor");
  }
  return table;
}

PairMoments pair_closed_form(int n, double tau) {
  check_np(n, 2);
  if (!(tau >= 0.0)) throw std::invalid_argument("pair_closed_form: tau must be >= 0");
  if (tau > max_admissible_tau(n, 2))
    throw std::range_error("pair_closed_form: tau too large; maximal admissible tau is " +
                           std::to_string(max_admissible_tau(n, 2)));
  const double fast = (n * n + 2.0 * n) * std::exp(lambda1(n) * tau);
  const double slow = n * (n - 1.0) * std::exp(lambda2(n) * tau);
  PairMoments out;
  out.tr2_g = (fast + 2.0 * slow) / 3.0;
  out.tr_g2 = (fast - slow) / 3.0;
  return out;
}

MomentBounds moment_bounds(int n, int p, double tau) {
  check_np(n, p);
  if (!(tau >= 0.0)) throw std::invalid_argument("moment_bounds: tau must be >= 0");
  if (tau > max_admissible_tau(n, p))
    throw std::range_error("moment_bounds: tau too large; maximal admissible tau is " +
                           std::to_string(max_admissible_tau(n, p)));
  const double growth = std::exp(intermittency_exponent(n, p) * tau);
  MomentBounds b;
  b.lower = n * growth;
  b.upper = std::pow(static_cast<double>(n), p) * growth;
  return b;
}

}  // namespace slngbm
