#include "slngbm/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <stdexcept>
#include <thread>

#include "hot_kernels.hpp"
#include "slngbm/pde.hpp"

namespace slngbm {

namespace {

constexpr std::int64_t kBlockSize = 256;

// run_path(state, path_index) fills per-path slots; states are per worker.
template <typename MakeState, typename RunPath>
void run_paths(std::int64_t n_paths, int workers, MakeState make_state, RunPath run_path) {
  workers = std::min<std::int64_t>(workers, std::max<std::int64_t>(1, n_paths / kBlockSize + 1));
  if (workers <= 1) {
    auto state = make_state();
    for (std::int64_t i = 0; i < n_paths; ++i) run_path(state, i);
    return;
  }
  std::atomic<std::int64_t> next_block{0};
  const std::int64_t n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
  auto worker = [&]() {
    auto state = make_state();
    for (;;) {
      const std::int64_t b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      const std::int64_t first = b * kBlockSize;
      const std::int64_t last = std::min(n_paths, first + kBlockSize);
      for (std::int64_t i = first; i < last; ++i) run_path(state, i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

double pairwise_sum_impl(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, count - half);
}

// Drops NaN rows (diverged paths) while keeping path order.
std::vector<double> compact_finite(const std::vector<double>& samples, std::int64_t& n_dropped) {
  std::vector<double> out;
  out.reserve(samples.size());
  n_dropped = 0;
  for (double v : samples) {
    if (std::isnan(v))
      ++n_dropped;
    else
      out.push_back(v);
  }
  return out;
}

double batch_means_stderr(const std::vector<double>& values) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  const int n_batches = static_cast<int>(std::min<std::int64_t>(100, n));
  if (n_batches < 2) return 0.0;
  std::vector<double> means(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    const std::int64_t first = n * b / n_batches;
    const std::int64_t last = n * (b + 1) / n_batches;
    means[b] = pairwise_sum(values.data() + first, last - first) / (last - first);
  }
  const double grand = pairwise_sum(means.data(), means.size()) / n_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (n_batches - 1);
  return std::sqrt(var / n_batches);
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return std::min(requested, 256);
  if (const char* env = std::getenv("SLN_GBM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(std::min(hw, 256u)) : 1;
}

double pairwise_sum(const double* values, std::size_t count) {
  return pairwise_sum_impl(values, count);
}

EstimatorSummary summarize_samples(const std::vector<double>& samples) {
  EstimatorSummary out;
  out.n_paths = static_cast<std::int64_t>(samples.size());
  std::int64_t dropped = 0;
  const std::vector<double> kept = compact_finite(samples, dropped);
  out.n_diverged = dropped;
  out.failed = out.n_paths > 0 &&
               static_cast<double>(dropped) / static_cast<double>(out.n_paths) > kDivergenceBudget;
  if (kept.empty()) {
    out.failed = true;
    return out;
  }
  const std::int64_t n = static_cast<std::int64_t>(kept.size());
  out.mean = pairwise_sum(kept.data(), kept.size()) / n;
  if (n >= 2) {
    std::vector<double> sq(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) sq[i] = (kept[i] - out.mean) * (kept[i] - out.mean);
    const double var = pairwise_sum(sq.data(), sq.size()) / (n - 1);
    out.stderr_plain = std::sqrt(var / n);
  }
  out.stderr_batch = batch_means_stderr(kept);
  return out;
}

std::vector<double> sample_final_log_trg(const EnsembleConfig& config) {
  TrajectoryConfig traj;
  traj.n = config.n;
  traj.tau_end = config.tau;
  traj.dt = config.dt;
  traj.scheme = config.scheme;
  traj.noise = config.noise;
  traj.p_max = 1;
  traj.master_seed = config.master_seed;
  traj.validate();
  const std::int64_t steps = traj.n_steps();

  std::vector<double> out(static_cast<std::size_t>(config.n_paths),
                          std::numeric_limits<double>::quiet_NaN());
  const int workers = resolve_workers(config.workers);
  run_paths(
      config.n_paths, workers, [&]() { return std::make_unique<PathSimulator>(traj); },
      [&](std::unique_ptr<PathSimulator>& sim, std::int64_t path) {
        sim->reset(config.base_stream_index + static_cast<std::uint64_t>(path));
        for (std::int64_t k = 0; k < steps && !sim->diverged(); ++k) sim->step();
        if (!sim->diverged()) out[static_cast<std::size_t>(path)] = sim->log_tr_gram();
      });
  return out;
}

const EstimatorSummary& TraceMomentEstimates::at(std::size_t checkpoint,
                                                 std::size_t monomial) const {
  return summaries[checkpoint * monomials.size() + monomial];
}

TraceMomentEstimates estimate_trace_moments(const TrajectoryConfig& config,
                                            std::int64_t n_paths, int workers) {
  config.validate();
  if (n_paths < 100) throw std::invalid_argument("estimate_trace_moments: need n_paths >= 100");

  TraceMomentEstimates result;
  result.config = config;
  result.n_paths = n_paths;
  for (int d = 1; d <= config.p_max; ++d)
    for (const Partition& part : partitions(d)) result.monomials.push_back(part);

  const std::vector<std::int64_t> snap = config.checkpoint_steps();
  for (std::int64_t k : snap) result.checkpoint_times.push_back(static_cast<double>(k) * config.dt);

  const std::size_t n_mono = result.monomials.size();
  const std::size_t n_cp = snap.size();
  const std::size_t row = n_mono * n_cp;
  std::vector<double> values(row * static_cast<std::size_t>(n_paths),
                             std::numeric_limits<double>::quiet_NaN());

  run_paths(
      n_paths, resolve_workers(workers), [&]() { return 0; },
      [&](int&, std::int64_t path) {
        TrajectoryConfig c = config;
        c.stream_index = config.stream_index + static_cast<std::uint64_t>(path);
        const TrajectoryRecord rec = run_trajectory(c);
        if (rec.diverged) return;  // row stays NaN
        double* slot = values.data() + static_cast<std::size_t>(path) * row;
        for (std::size_t cp = 0; cp < n_cp; ++cp) {
          const GramSummary& gs = rec.checkpoints[cp];
          for (std::size_t m = 0; m < n_mono; ++m) {
            double prod = 1.0;
            for (int part : result.monomials[m].parts) prod *= gs.trace_powers[part - 1];
            slot[cp * n_mono + m] = prod;
          }
        }
      });

  // Columnwise reduction, single-threaded and worker-count independent.
  std::vector<double> column(static_cast<std::size_t>(n_paths));
  result.summaries.resize(row);
  for (std::size_t c = 0; c < row; ++c) {
    for (std::int64_t p = 0; p < n_paths; ++p)
      column[static_cast<std::size_t>(p)] = values[static_cast<std::size_t>(p) * row + c];
    EstimatorSummary s = summarize_samples(column);
    s.n = config.n;
    s.dt = config.dt;
    s.scheme = config.scheme;
    s.master_seed = config.master_seed;
    s.tau = result.checkpoint_times[c / n_mono];
    result.summaries[c] = s;
  }
  result.n_diverged = result.summaries.empty() ? 0 : result.summaries[0].n_diverged;
  result.failed =
      static_cast<double>(result.n_diverged) / static_cast<double>(n_paths) > kDivergenceBudget;
  // tr G at the last checkpoint (monomial index 0 is the partition (1))
  result.final_trg_samples.resize(static_cast<std::size_t>(n_paths));
  for (std::int64_t p = 0; p < n_paths; ++p)
    result.final_trg_samples[static_cast<std::size_t>(p)] =
        values[static_cast<std::size_t>(p) * row + (n_cp - 1) * n_mono];
  return result;
}

namespace {

std::vector<double> rhat_samples_at(int n, double tau_star, std::int64_t n_paths, double dt,
                                    std::uint64_t seed, Scheme scheme, NoiseKind noise,
                                    int workers) {
  if (!(tau_star >= 1.0)) throw std::invalid_argument("nontightness: tau_star must be >= 1");
  if (tau_star > 690.0)
    throw std::range_error("nontightness: n e^{tau_star} overflows for tau_star > 690");
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.tau = tau_star;
  cfg.dt = dt;
  cfg.scheme = scheme;
  cfg.noise = noise;
  cfg.master_seed = seed;
  cfg.n_paths = n_paths;
  cfg.workers = workers;
  std::vector<double> log_trg = sample_final_log_trg(cfg);
  // R_hat = tr G / (n e^{tau*}), formed in log space to dodge overflow.
  const double shift = std::log(static_cast<double>(n)) + tau_star;
  for (double& v : log_trg)
    if (!std::isnan(v)) v = std::exp(v - shift);
  return log_trg;
}

void echo(EstimatorSummary& s, int n, double tau, double dt, Scheme scheme, std::uint64_t seed) {
  s.n = n;
  s.tau = tau;
  s.dt = dt;
  s.scheme = scheme;
  s.master_seed = seed;
}

}  // namespace

NontightnessEstimate nontightness_functional(int n, double tau_star, std::int64_t n_paths,
                                             double dt, std::uint64_t seed, Scheme scheme,
                                             NoiseKind noise, int workers,
                                             std::vector<double>* rhat_samples) {
  std::vector<double> rhat = rhat_samples_at(n, tau_star, n_paths, dt, seed, scheme, noise, workers);
  NontightnessEstimate out;
  out.tau_star = tau_star;
  out.sigma_star = prop2_sigma_star(n, tau_star);
  out.r_hat_star = std::exp(out.sigma_star);
  std::vector<double> truncated(rhat.size());
  for (std::size_t i = 0; i < rhat.size(); ++i) {
    if (std::isnan(rhat[i]))
      truncated[i] = rhat[i];
    else
      truncated[i] = rhat[i] <= out.r_hat_star ? rhat[i] : 0.0;
  }
  out.summary = summarize_samples(truncated);
  echo(out.summary, n, tau_star, dt, scheme, seed);
  if (rhat_samples) *rhat_samples = std::move(rhat);
  return out;
}

EstimatorSummary weighted_rhat_functional(int n, double tau_star, std::int64_t n_paths,
                                          double dt, std::uint64_t seed,
                                          const std::function<double(double)>& weight_of_sigma,
                                          Scheme scheme, int workers) {
  std::vector<double> rhat =
      rhat_samples_at(n, tau_star, n_paths, dt, seed, scheme, NoiseKind::isotropic, workers);
  for (double& v : rhat)
    if (!std::isnan(v)) v = v * weight_of_sigma(std::log(v));
  EstimatorSummary s = summarize_samples(rhat);
  echo(s, n, tau_star, dt, scheme, seed);
  return s;
}

LogNormalReference make_lognormal_reference(int n, double tau) {
  if (n < 2) throw std::domain_error("lognormal reference: n must be >= 2");
  LogNormalReference ref;
  ref.n = n;
  ref.tau = tau;
  ref.mu_ref = (1.0 - 2.0 / (n + 2)) * tau;
  ref.var_ref = 4.0 * tau / (n + 2);
  ref.functional_ref = tau > 0.0 ? phi(-1.0 / std::sqrt(ref.var_ref)) : 0.0;
  return ref;
}

LogNormalDiagnostics lognormal_diagnostics(int n, double tau, std::int64_t n_paths, double dt,
                                           std::uint64_t seed, Scheme scheme, int workers,
                                           std::vector<double>* log_trg_samples) {
  if (!(tau >= 0.0)) throw std::invalid_argument("lognormal_diagnostics: tau must be >= 0");
  if (tau == 0.0) {
    // ln|F_0|^2 = ln n exactly, no spread
    LogNormalDiagnostics out;
    out.reference = make_lognormal_reference(n, 0.0);
    out.emp_mean = std::log(static_cast<double>(n));
    out.n_paths = n_paths;
    if (log_trg_samples)
      log_trg_samples->assign(static_cast<std::size_t>(n_paths), out.emp_mean);
    return out;
  }
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.tau = tau;
  cfg.dt = dt;
  cfg.scheme = scheme;
  cfg.master_seed = seed;
  cfg.n_paths = n_paths;
  cfg.workers = workers;
  const std::vector<double> samples = sample_final_log_trg(cfg);

  LogNormalDiagnostics out;
  out.reference = make_lognormal_reference(n, tau);
  const EstimatorSummary mean_summary = summarize_samples(samples);
  out.emp_mean = mean_summary.mean;
  out.emp_mean_stderr = mean_summary.stderr_batch;
  out.n_paths = mean_summary.n_paths;
  out.n_diverged = mean_summary.n_diverged;
  out.failed = mean_summary.failed;

  // Variance with its own batch-means error bar.
  std::vector<double> centered_sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    centered_sq[i] = std::isnan(samples[i])
                         ? samples[i]
                         : (samples[i] - out.emp_mean) * (samples[i] - out.emp_mean);
  }
  const EstimatorSummary var_summary = summarize_samples(centered_sq);
  const std::int64_t kept = var_summary.n_paths - var_summary.n_diverged;
  out.emp_var = var_summary.mean * kept / std::max<std::int64_t>(1, kept - 1);
  out.emp_var_stderr = var_summary.stderr_batch;
  if (log_trg_samples) *log_trg_samples = samples;
  return out;
}

WeakOrderEstimate weak_order_slope(Scheme scheme, int n, double tau, double dt_coarse,
                                   int n_levels, std::int64_t n_paths, std::uint64_t seed,
                                   int workers) {
  if (n_levels < 2 || n_levels > 12)
    throw std::invalid_argument("weak_order_slope: need 2..12 dt levels");
  if (!(tau > 0.0 && dt_coarse > 0.0))
    throw std::invalid_argument("weak_order_slope: tau and dt_coarse must be > 0");
  const std::int64_t coarse_steps = std::llround(tau / dt_coarse);
  if (coarse_steps < 1) throw std::invalid_argument("weak_order_slope: dt_coarse > tau");

  WeakOrderEstimate result;
  for (int l = 0; l < n_levels; ++l) result.dts.push_back(dt_coarse / std::pow(2.0, l));
  const std::int64_t fine_per_coarse = std::int64_t{1} << (n_levels - 1);
  const std::int64_t fine_steps = coarse_steps * fine_per_coarse;
  const double dt_fine = dt_coarse / static_cast<double>(fine_per_coarse);

  const std::size_t nn = static_cast<std::size_t>(n) * n;
  struct WorkerState {
    NoiseCoefficients coeffs;
    NoiseIncrement inc;
    std::vector<std::vector<double>> f;    // one state per level
    std::vector<std::vector<double>> acc;  // accumulated increment per level
    std::vector<double> t1, t2, t3;
    WorkerState(int n, int levels)
        : coeffs(noise_coefficients(n)),
          inc(n),
          f(levels, std::vector<double>(static_cast<std::size_t>(n) * n)),
          acc(levels, std::vector<double>(static_cast<std::size_t>(n) * n)),
          t1(static_cast<std::size_t>(n) * n),
          t2(static_cast<std::size_t>(n) * n),
          t3(static_cast<std::size_t>(n) * n) {}
  };

  std::vector<double> y(static_cast<std::size_t>(n_paths) * n_levels,
                        std::numeric_limits<double>::quiet_NaN());

  run_paths(
      n_paths, resolve_workers(workers),
      [&]() { return std::make_unique<WorkerState>(n, n_levels); },
      [&](std::unique_ptr<WorkerState>& st, std::int64_t path) {
        RngStream rng(seed, static_cast<std::uint64_t>(path));
        for (int l = 0; l < n_levels; ++l) {
          mat_set_identity(st->f[l].data(), n);
          std::fill(st->acc[l].begin(), st->acc[l].end(), 0.0);
        }
        bool diverged = false;
        for (std::int64_t k = 1; k <= fine_steps && !diverged; ++k) {
          sample_increment_into(st->coeffs, dt_fine, rng, st->inc);
          const double* s = st->inc.d_sym.data();
          const double* a = st->inc.d_skew.data();
          for (int l = 0; l < n_levels; ++l) {
            double* acc = st->acc[l].data();
            for (std::size_t m = 0; m < nn; ++m) acc[m] += s[m] + a[m];
          }
          const auto tag = scheme == Scheme::euler ? detail::SchemeTag::euler
                                                   : detail::SchemeTag::exponential;
          for (int l = 0; l < n_levels; ++l) {
            const std::int64_t stride = std::int64_t{1} << (n_levels - 1 - l);
            if (k % stride != 0) continue;
            double* f = st->f[l].data();
            detail::apply_step(tag, n, f, st->acc[l].data(), kDefaultExpTol, st->t1.data(),
                               st->t2.data(), st->t3.data());
            std::fill(st->acc[l].begin(), st->acc[l].end(), 0.0);
            if (mat_max_abs(f, n) > kDivergenceLimit) diverged = true;
          }
        }
        if (diverged) return;
        double* slot = y.data() + static_cast<std::size_t>(path) * n_levels;
        for (int l = 0; l < n_levels; ++l) {
          gram_into(st->f[l].data(), st->t1.data(), n);
          slot[l] = mat_trace(st->t1.data(), n);
        }
      });

  // Consecutive-level differences, then the log-log fit.
  std::vector<double> column(static_cast<std::size_t>(n_paths));
  for (int l = 0; l + 1 < n_levels; ++l) {
    for (std::int64_t p = 0; p < n_paths; ++p) {
      const double* slot = y.data() + static_cast<std::size_t>(p) * n_levels;
      column[static_cast<std::size_t>(p)] = slot[l] - slot[l + 1];
    }
    const EstimatorSummary s = summarize_samples(column);
    result.diff_means.push_back(s.mean);
    result.diff_stderrs.push_back(s.stderr_batch);
    result.n_diverged = s.n_diverged;
    result.failed = result.failed || s.failed;
  }
  for (std::int64_t p = 0; p < n_paths; ++p)
    column[static_cast<std::size_t>(p)] = y[static_cast<std::size_t>(p) * n_levels];
  const EstimatorSummary coarse = summarize_samples(column);
  result.coarse_mean = coarse.mean;
  result.coarse_stderr = coarse.stderr_batch;
  result.n_paths = n_paths;

  // Weighted log-log fit: y_l = ln|D_l| carries variance (stderr_l/D_l)^2,
  // so coarse differences (measured sharply) dominate the slope.
  const int m = n_levels - 1;
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (int l = 0; l < m; ++l) {
    const double x = std::log(result.dts[l]);
    const double d = std::abs(result.diff_means[l]);
    const double y = std::log(d);
    const double sigma = result.diff_stderrs[l] / d;
    const double w = 1.0 / (sigma * sigma);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  result.slope = (sw * swxy - swx * swy) / det;
  result.slope_stderr = std::sqrt(sw / det);
  return result;
}

}  // namespace slngbm
