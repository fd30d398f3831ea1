#include "slngbm/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hot_kernels.hpp"
#include "slngbm/partitions.hpp"

namespace slngbm {

void TrajectoryConfig::validate() const {
  if (n < 2) throw std::invalid_argument("TrajectoryConfig: n must be >= 2");
  if (!(tau_end > 0.0)) throw std::invalid_argument("TrajectoryConfig: empty horizon (tau_end <= 0)");
  if (!(dt > 0.0)) throw std::invalid_argument("TrajectoryConfig: dt must be > 0");
  if (tau_end / dt > 1e8) throw std::invalid_argument("TrajectoryConfig: tau_end/dt exceeds 1e8");
  if (p_max < 1 || p_max > max_partition_degree())
    throw std::invalid_argument("TrajectoryConfig: p_max must be in 1..8");
  if (!(exp_tol > 0.0 && exp_tol <= 1e-6))
    throw std::invalid_argument("TrajectoryConfig: exp_tol must be in (0, 1e-6]");
  double prev = -1.0;
  for (double t : checkpoints) {
    if (!(t >= 0.0 && t <= tau_end + dt / 2.0))
      throw std::invalid_argument("TrajectoryConfig: checkpoint outside [0, tau_end]");
    if (t < prev) throw std::invalid_argument("TrajectoryConfig: checkpoints must be sorted");
    prev = t;
  }
  const std::vector<std::int64_t> snapped = checkpoint_steps();
  for (std::size_t i = 1; i < snapped.size(); ++i)
    if (snapped[i] <= snapped[i - 1])
      throw std::invalid_argument(
          "TrajectoryConfig: checkpoints collide on the same step boundary");
}

std::int64_t TrajectoryConfig::n_steps() const {
  std::int64_t steps = 0;
  for (std::int64_t k : checkpoint_steps()) steps = std::max(steps, k);
  return steps;
}

std::vector<std::int64_t> TrajectoryConfig::checkpoint_steps() const {
  std::vector<double> times = checkpoints;
  if (times.empty()) times.push_back(tau_end);
  std::vector<std::int64_t> steps;
  steps.reserve(times.size());
  for (double t : times) steps.push_back(std::llround(t / dt));
  return steps;
}

namespace {

// f <- f + f*m, using tmp as the product buffer
inline void euler_apply(double* f, const double* m, double* tmp, int n) {
  mat_mul(f, m, tmp, n);
  mat_add_scaled(f, tmp, 1.0, n);
}

// f <- f * exp(m)
inline void exponential_apply(double* f, const double* m, double tol, int n, double* e,
                              double* s1, double* s2) {
  expm_into(m, e, tol, n, s1, s2);
  mat_mul(f, e, s1, n);
  mat_copy(s1, f, n);
}

}  // namespace

SquareMatrix step_euler(const SquareMatrix& f, const NoiseIncrement& db) {
  const int n = f.dim();
  if (db.d_sym.dim() != n) throw std::invalid_argument("step_euler: dimension mismatch");
  if (!f.all_finite()) throw std::invalid_argument("step_euler: non-finite state");
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = db.d_sym.data()[k] + db.d_skew.data()[k];
  SquareMatrix out = f;
  std::vector<double> tmp(m.size());
  euler_apply(out.data(), m.data(), tmp.data(), n);
  return out;
}

SquareMatrix step_exponential(const SquareMatrix& f, const NoiseIncrement& db, double tol) {
  const int n = f.dim();
  if (db.d_sym.dim() != n) throw std::invalid_argument("step_exponential: dimension mismatch");
  if (!f.all_finite()) throw std::invalid_argument("step_exponential: non-finite state");
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = db.d_sym.data()[k] + db.d_skew.data()[k];
  SquareMatrix out = f;
  std::vector<double> e(m.size()), s1(m.size()), s2(m.size());
  exponential_apply(out.data(), m.data(), tol, n, e.data(), s1.data(), s2.data());
  return out;
}

PathSimulator::PathSimulator(const TrajectoryConfig& config)
    : config_(config),
      coeffs_(noise_coefficients(config.n)),
      rng_(config.master_seed, config.stream_index),
      inc_(config.n),
      f_(static_cast<std::size_t>(config.n) * config.n),
      db_(f_.size()),
      t1_(f_.size()),
      t2_(f_.size()),
      t3_(f_.size()) {
  config_.validate();
  reset(config.stream_index);
}

void PathSimulator::reset(std::uint64_t stream_index) {
  rng_ = RngStream(config_.master_seed, stream_index);
  mat_set_identity(f_.data(), config_.n);
  step_count_ = 0;
  diverged_ = false;
}

void PathSimulator::step() {
  if (diverged_) return;
  const int n = config_.n;
  if (config_.noise == NoiseKind::zero) {
    std::fill(db_.begin(), db_.end(), 0.0);
  } else {
    sample_increment_into(coeffs_, config_.dt, rng_, inc_);
    const double* s = inc_.d_sym.data();
    const double* a = inc_.d_skew.data();
    for (std::size_t k = 0; k < db_.size(); ++k) db_[k] = s[k] + a[k];
  }
  const auto tag = config_.scheme == Scheme::euler ? detail::SchemeTag::euler
                                                   : detail::SchemeTag::exponential;
  detail::apply_step(tag, n, f_.data(), db_.data(), config_.exp_tol, t1_.data(), t2_.data(),
                     t3_.data());
  ++step_count_;
  if (mat_max_abs(f_.data(), n) > kDivergenceLimit) diverged_ = true;
}

double PathSimulator::log_tr_gram() const {
  const int n = config_.n;
  // tr G = |F|_F^2; rescale before squaring so huge excursions stay finite.
  const double scale = mat_max_abs(f_.data(), n);
  if (scale == 0.0) throw std::runtime_error("PathSimulator: zero state");
  double s = 0.0;
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const double v = f_[k] / scale;
    s += v * v;
  }
  return std::log(s) + 2.0 * std::log(scale);
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& config) {
  config.validate();
  TrajectoryRecord record;
  record.config = config;

  std::vector<double> times = config.checkpoints;
  if (times.empty()) times.push_back(config.tau_end);
  const std::vector<std::int64_t> snap = config.checkpoint_steps();
  record.requested_times = times;
  record.snap_errors.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    record.snap_errors[i] = std::abs(static_cast<double>(snap[i]) * config.dt - times[i]);

  PathSimulator sim(config);
  const std::int64_t last_step = config.n_steps();

  SquareMatrix f = SquareMatrix::identity(config.n);
  std::size_t next = 0;
  for (std::int64_t k = 0; k <= last_step; ++k) {
    while (next < snap.size() && snap[next] == k) {
      mat_copy(sim.f(), f.data(), config.n);
      record.checkpoints.push_back(
          make_gram_summary(f, config.p_max, static_cast<double>(k) * config.dt));
      ++next;
    }
    if (k == last_step) break;
    sim.step();
    if (sim.diverged()) {
      record.diverged = true;
      record.diverged_at = sim.tau();
      break;
    }
  }
  if (!record.diverged) {
    mat_copy(sim.f(), f.data(), config.n);
    record.final_log_det = log_det(f);
  }
  return record;
}

}  // namespace slngbm
