#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slngbm/integrators.hpp"
#include "slngbm/partitions.hpp"

namespace slngbm {

/// Fraction of diverged paths beyond which an estimate is marked failed.
constexpr double kDivergenceBudget = 1e-4;

/// Worker count used by the path runners: `requested` if positive, else the
/// SLN_GBM_THREADS environment cap, else hardware concurrency. Estimates are
/// bit-identical for any worker count.
int resolve_workers(int requested = 0);

/// Deterministic pairwise sum (fixed halving tree, independent of threads).
double pairwise_sum(const double* values, std::size_t count);

struct EstimatorSummary {
  double mean = 0.0;
  double stderr_batch = 0.0;  // batch means over <=100 batches; the headline error bar
  double stderr_plain = 0.0;  // iid standard error, reported alongside
  std::int64_t n_paths = 0;
  std::int64_t n_diverged = 0;
  bool failed = false;  // divergence budget exceeded

  // config echo
  int n = 0;
  double tau = 0.0;
  double dt = 0.0;
  Scheme scheme = Scheme::exponential;
  std::uint64_t master_seed = 0;
};

/// Summarizes per-path samples; NaN entries mark diverged paths and are
/// excluded with a count.
EstimatorSummary summarize_samples(const std::vector<double>& samples);

/// Shared ensemble runner: final ln tr G per path (NaN where diverged).
/// Path i uses stream_index = base_stream_index + i.
struct EnsembleConfig {
  int n = 3;
  double tau = 1.0;
  double dt = 1e-2;
  Scheme scheme = Scheme::exponential;
  NoiseKind noise = NoiseKind::isotropic;
  std::uint64_t master_seed = 0;
  std::uint64_t base_stream_index = 0;
  std::int64_t n_paths = 1000;
  int workers = 0;  // 0 = auto
};

std::vector<double> sample_final_log_trg(const EnsembleConfig& config);

/// Sample mean and standard error of every trace monomial of degree up to
/// config.p_max at every checkpoint.
struct TraceMomentEstimates {
  std::vector<double> checkpoint_times;  // snapped to step boundaries
  std::vector<Partition> monomials;      // degree 1..p_max, canonical order
  std::vector<EstimatorSummary> summaries;  // checkpoint-major
  std::vector<double> final_trg_samples;  // per-path tr G at the last checkpoint (NaN = diverged)
  std::int64_t n_paths = 0;
  std::int64_t n_diverged = 0;
  bool failed = false;
  TrajectoryConfig config;

  const EstimatorSummary& at(std::size_t checkpoint, std::size_t monomial) const;
};

TraceMomentEstimates estimate_trace_moments(const TrajectoryConfig& config,
                                            std::int64_t n_paths, int workers = 0);

/// Truncated-expectation functional of Prop.-2 type: mean of
/// R_hat I(R_hat <= R_hat_star), R_hat = tr G / (n e^{tau*}), with the
/// threshold R_hat_star = e^{2 tau*/(n+2) - 1}. Every retained sample is
/// bounded by the threshold, so stderr <= sqrt(R_hat_star / n_paths).
struct NontightnessEstimate {
  EstimatorSummary summary;
  double tau_star = 0.0;
  double r_hat_star = 0.0;
  double sigma_star = 0.0;  // ln R_hat_star
};

NontightnessEstimate nontightness_functional(int n, double tau_star, std::int64_t n_paths,
                                             double dt, std::uint64_t seed,
                                             Scheme scheme = Scheme::exponential,
                                             NoiseKind noise = NoiseKind::isotropic,
                                             int workers = 0,
                                             std::vector<double>* rhat_samples = nullptr);

/// Mean of R_hat * weight(ln R_hat) for an arbitrary weight profile; the
/// chain check pairs this with the backward-solution terminal data.
EstimatorSummary weighted_rhat_functional(int n, double tau_star, std::int64_t n_paths,
                                          double dt, std::uint64_t seed,
                                          const std::function<double(double)>& weight_of_sigma,
                                          Scheme scheme = Scheme::exponential,
                                          int workers = 0);

/// Gaussian reference for ln|F_tau|^2 implied by the stochastic-exponential
/// approximation: mean (1 - 2/(n+2)) tau, variance 4 tau/(n+2), and the
/// value Phi(-1/sqrt(var)) the truncated functional settles near.
struct LogNormalReference {
  int n = 0;
  double tau = 0.0;
  double mu_ref = 0.0;
  double var_ref = 0.0;
  double functional_ref = 0.0;
};

LogNormalReference make_lognormal_reference(int n, double tau);

/// Sample mean/variance of ln tr G with standard errors, reported next to
/// the Gaussian reference. Informational: the reference is an approximation
/// and no pass/fail is attached here.
struct LogNormalDiagnostics {
  double emp_mean = 0.0;
  double emp_mean_stderr = 0.0;
  double emp_var = 0.0;
  double emp_var_stderr = 0.0;
  LogNormalReference reference;
  std::int64_t n_paths = 0;
  std::int64_t n_diverged = 0;
  bool failed = false;
};

LogNormalDiagnostics lognormal_diagnostics(int n, double tau, std::int64_t n_paths, double dt,
                                           std::uint64_t seed,
                                           Scheme scheme = Scheme::exponential, int workers = 0,
                                           std::vector<double>* log_trg_samples = nullptr);

/// Weak-order measurement for E tr G at a fixed horizon: all dt levels are
/// driven by one shared fine Brownian path per trajectory, so consecutive
/// bias differences E[Y(dt_l) - Y(dt_{l+1})] come out with small variance.
/// If the bias scales like c dt^q, those differences scale like dt^q too,
/// and the fitted log-log slope estimates q directly.
struct WeakOrderEstimate {
  std::vector<double> dts;           // coarse to fine, halving
  std::vector<double> diff_means;    // E[Y_l - Y_{l+1}]
  std::vector<double> diff_stderrs;
  double coarse_mean = 0.0;          // E[Y_0], plain Monte Carlo
  double coarse_stderr = 0.0;
  double slope = 0.0;                // weighted log-log fit over the differences
  double slope_stderr = 0.0;         // propagated from the difference stderrs
  std::int64_t n_paths = 0;
  std::int64_t n_diverged = 0;
  bool failed = false;
};

WeakOrderEstimate weak_order_slope(Scheme scheme, int n, double tau, double dt_coarse,
                                   int n_levels, std::int64_t n_paths, std::uint64_t seed,
                                   int workers = 0);

}  // namespace slngbm
