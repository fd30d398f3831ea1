#pragma once

#include <map>
#include <vector>

#include "slngbm/partitions.hpp"

namespace slngbm {

/// Growth rate of the degree-p moments: r(n, p) = p + 2p(p-1)/(n+2).
/// r(n, 1) = 1 and r(n, 2) equals the fast eigenvalue lambda1(n).
double intermittency_exponent(int n, double p);

/// Eigenvalues of the degree-2 system: lambda1 = 2 + 4/(n+2) (growth of
/// both second-degree moments), lambda2 = 2 - 2/(n-1) (rate of their
/// difference).
double lambda1(int n);
double lambda2(int n);

/// Closed linear system for d/dtau of E[prod_i tr G^{p_i}] over all
/// partitions of a fixed degree p. Row lambda of `entries` holds the
/// coefficients of d E[m_lambda]/dtau on the canonical basis:
///   each part p_i contributes (p_i + p_i(p_i-1)(n-2)/alpha_n) on m_lambda
///   plus (p_i n/alpha_n) on each split of p_i into (q, p_i-q);
///   each unordered pair (i, j) contributes (4 p_i p_j/alpha_n) times
///   (n on the merged partition minus 1 on m_lambda).
/// For p = 2 this is exactly the explicit 2x2 system of the second-degree
/// moments (up to basis order).
struct GeneratorMatrix {
  int n = 0;
  int p = 0;
  std::vector<Partition> basis;         // canonical order, partitions of p
  std::vector<std::vector<double>> entries;  // entries[row][col]

  int index_of(const Partition& part) const;
};

GeneratorMatrix generator_matrix(int n, int p);

/// Exact expected values of every degree-p trace monomial at time tau.
struct MomentTable {
  double tau = 0.0;
  int n = 0;
  int p = 0;
  std::vector<Partition> basis;
  std::vector<double> values;  // aligned with basis

  double value(const Partition& part) const;
  double tr_power() const;   // E tr G^p      (partition (p))
  double tr_to_p() const;    // E (tr G)^p    (partition (1,...,1))
};

/// Solves the system from the initial data m_lambda(0) = n^{#parts} by two
/// independent routes (matrix exponential and adaptive ODE integration) and
/// requires them to agree to 1e-10 relative before returning.
MomentTable exact_moments(int n, int p, double tau);

/// Closed form of the degree-2 pair from the explicit eigensolution:
///   E (tr G)^2 = ((n^2+2n) e^{l1 tau} + 2n(n-1) e^{l2 tau}) / 3
///   E tr G^2   = ((n^2+2n) e^{l1 tau} -  n(n-1) e^{l2 tau}) / 3
struct PairMoments {
  double tr2_g = 0.0;  // E (tr G)^2
  double tr_g2 = 0.0;  // E tr G^2
};

PairMoments pair_closed_form(int n, double tau);

/// Two-sided envelope n e^{r tau} <= E tr G^p <= E (tr G)^p <= n^p e^{r tau}.
struct MomentBounds {
  double lower = 0.0;
  double upper = 0.0;
};

MomentBounds moment_bounds(int n, int p, double tau);

/// Largest tau for which degree-p moments stay inside double range.
double max_admissible_tau(int n, int p);

}  // namespace slngbm
