#pragma once

#include <cstdint>

#include "slngbm/linalg.hpp"
#include "slngbm/rng.hpp"

namespace slngbm {

/// Scales of the isotropic Brownian motion on the trace-free matrices.
///
/// The driving noise is characterized implicitly by O(n)-invariance in law,
/// E[B B] = 0 and E[B^T B] = tau*id. Writing the symmetric-part covariance
/// as beta*(d d + d d)/2 + gamma*d(x)d and matching it against both
/// quadratic-variation forms fixes beta = n/alpha_n and gamma = -1/alpha_n;
/// the skew part has entry covariance (d d - d d)/(2(n-1)). That turns
/// into the sampling scales below.
struct NoiseCoefficients {
  int n = 0;
  double alpha_n = 0.0;  // (n-1)(n+2)
  double c_sym = 0.0;    // sqrt(n / alpha_n), per unit sqrt(dt)
  double c_skew = 0.0;   // sqrt(1 / (n-1)), per unit sqrt(dt)
};

NoiseCoefficients noise_coefficients(int n);

/// One sampled increment of the noise, split into its symmetric trace-free
/// and skew-symmetric parts. d_sym is exactly symmetric and traceless to
/// roundoff; d_skew is exactly skew.
struct NoiseIncrement {
  SquareMatrix d_sym;
  SquareMatrix d_skew;
  double dt = 0.0;

  explicit NoiseIncrement(int n) : d_sym(SquareMatrix::zero(n)), d_skew(SquareMatrix::zero(n)) {}
};

NoiseIncrement sample_increment(const NoiseCoefficients& coeffs, double dt, RngStream& rng);

/// Allocation-free variant for hot loops; inc must be sized to coeffs.n.
void sample_increment_into(const NoiseCoefficients& coeffs, double dt, RngStream& rng,
                           NoiseIncrement& inc);

enum class CovKind { trace_trace, sandwich };

/// Per-unit-time quadratic covariation of the symmetric noise part tested
/// against symmetric matrices G, H:
///   trace_trace: d[tr(G B_sym) tr(H B_sym)] = (n tr GH - tr G tr H)/alpha_n
///   sandwich:    d[tr(G B_sym H B_sym)] = ((n-2) tr GH + n tr G tr H)/(2 alpha_n)
double theoretical_covariation(const SquareMatrix& g, const SquareMatrix& h, CovKind kind, int n);

struct CovariationEstimate {
  double mean = 0.0;
  double stderr_batch = 0.0;  // batch-means standard error
  double stderr_plain = 0.0;  // iid standard error
  std::int64_t n_samples = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Monte Carlo estimate of the same covariation from sampled increments.
CovariationEstimate empirical_covariation(const SquareMatrix& g, const SquareMatrix& h,
                                          CovKind kind, int n, double dt, std::int64_t n_samples,
                                          const RngStream& rng);

/// Entrywise Monte Carlo mean with its per-entry standard error.
struct MatrixStat {
  SquareMatrix mean;
  SquareMatrix stderr_of_mean;
  explicit MatrixStat(int n)
      : mean(SquareMatrix::zero(n)), stderr_of_mean(SquareMatrix::zero(n)) {}

  /// Largest |mean - expected| / stderr over all entries.
  double max_z(const SquareMatrix& expected) const;
};

/// Monte Carlo moments of the increment, used by the qvcheck harness:
/// mean of dB/sqrt(dt), second moments dB dB/dt and dB^T dB/dt, the
/// symmetric/skew split moments, and a sym/skew independence probe.
struct NoiseMomentChecks {
  MatrixStat mean_over_sqrt_dt;   // -> 0
  MatrixStat bb_over_dt;          // E[dB dB]/dt -> 0
  MatrixStat btb_over_dt;         // E[dB^T dB]/dt -> id
  MatrixStat sym_sq_over_dt;      // E[d_sym^2]/dt -> id/2
  MatrixStat skew_sq_over_dt;     // E[d_skew^2]/dt -> -id/2
  double cross_sym_skew = 0.0;    // E[d_sym_01 d_skew_01]/dt -> 0
  double cross_stderr = 0.0;
  std::int64_t n_samples = 0;

  explicit NoiseMomentChecks(int n)
      : mean_over_sqrt_dt(n), bb_over_dt(n), btb_over_dt(n), sym_sq_over_dt(n),
        skew_sq_over_dt(n) {}
};

NoiseMomentChecks noise_moment_checks(int n, double dt, std::int64_t n_samples,
                                      const RngStream& rng);

}  // namespace slngbm
