#include "slngbm/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace slngbm {

namespace {

void check_symmetric(const SquareMatrix& g, const char* who) {
  const int n = g.dim();
  const double scale = std::max(1.0, g.max_abs());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(g(i, j) - g(j, i)) > 1e-12 * scale)
        throw std::invalid_argument(std::string(who) + ": input matrix is not symmetric");
}

double batch_stderr(const std::vector<double>& batch_means) {
  const std::size_t b = batch_means.size();
  double mean = 0.0;
  for (double v : batch_means) mean += v;
  mean /= static_cast<double>(b);
  double var = 0.0;
  for (double v : batch_means) var += (v - mean) * (v - mean);
  var /= static_cast<double>(b - 1);
  return std::sqrt(var / static_cast<double>(b));
}

}  // namespace

NoiseCoefficients noise_coefficients(int n) {
  if (n < 2) throw std::domain_error("noise_coefficients: n must be >= 2 (alpha_1 = 0)");
  NoiseCoefficients c;
  c.n = n;
  c.alpha_n = static_cast<double>(n - 1) * static_cast<double>(n + 2);
  c.c_sym = std::sqrt(static_cast<double>(n) / c.alpha_n);
  c.c_skew = std::sqrt(1.0 / static_cast<double>(n - 1));
  return c;
}

void sample_increment_into(const NoiseCoefficients& coeffs, double dt, RngStream& rng,
                           NoiseIncrement& inc) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be > 0");
  const int n = coeffs.n;
  const double sym_scale = coeffs.c_sym * std::sqrt(dt);
  const double skew_scale = coeffs.c_skew * std::sqrt(dt);

  double* s = inc.d_sym.data();
  double* a = inc.d_skew.data();

  // S = (W + W^T)/2 from one iid normal matrix W, built entry-pairwise so
  // the result is exactly symmetric; then the trace is projected out.
  for (int i = 0; i < n; ++i) {
    s[i * n + i] = rng.next_normal();
    for (int j = i + 1; j < n; ++j) {
      const double w_ij = rng.next_normal();
      const double w_ji = rng.next_normal();
      const double v = 0.5 * (w_ij + w_ji);
      s[i * n + j] = v;
      s[j * n + i] = v;
    }
  }
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += s[i * n + i];
  const double shift = tr / n;
  for (int i = 0; i < n; ++i) s[i * n + i] -= shift;
  const int nn = n * n;
  for (int k = 0; k < nn; ++k) s[k] *= sym_scale;

  // A = (W' - W'^T)/2 from an independent normal matrix.
  for (int i = 0; i < n; ++i) {
    a[i * n + i] = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double w_ij = rng.next_normal();
      const double w_ji = rng.next_normal();
      const double v = skew_scale * 0.5 * (w_ij - w_ji);
      a[i * n + j] = v;
      a[j * n + i] = -v;
    }
  }
  inc.dt = dt;
}

NoiseIncrement sample_increment(const NoiseCoefficients& coeffs, double dt, RngStream& rng) {
  NoiseIncrement inc(coeffs.n);
  sample_increment_into(coeffs, dt, rng, inc);
  return inc;
}

double theoretical_covariation(const SquareMatrix& g, const SquareMatrix& h, CovKind kind,
                               int n) {
  if (g.dim() != n || h.dim() != n)
    throw std::invalid_argument("theoretical_covariation: dimension mismatch");
  check_symmetric(g, "theoretical_covariation");
  check_symmetric(h, "theoretical_covariation");
  const double alpha = static_cast<double>(n - 1) * static_cast<double>(n + 2);
  double tr_gh = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) tr_gh += g(i, k) * h(k, i);
  const double tr_g = g.trace();
  const double tr_h = h.trace();
  if (kind == CovKind::trace_trace) return (n * tr_gh - tr_g * tr_h) / alpha;
  return ((n - 2) * tr_gh + n * tr_g * tr_h) / (2.0 * alpha);
}

CovariationEstimate empirical_covariation(const SquareMatrix& g, const SquareMatrix& h,
                                          CovKind kind, int n, double dt, std::int64_t n_samples,
                                          const RngStream& rng) {
  if (g.dim() != n || h.dim() != n)
    throw std::invalid_argument("empirical_covariation: dimension mismatch");
  check_symmetric(g, "empirical_covariation");
  check_symmetric(h, "empirical_covariation");
  if (n_samples < 2) throw std::invalid_argument("empirical_covariation: need n_samples >= 2");

  const NoiseCoefficients coeffs = noise_coefficients(n);
  NoiseIncrement inc(n);
  RngStream stream(rng.master_seed(), rng.stream_index());

  const int n_batches = static_cast<int>(std::min<std::int64_t>(100, n_samples));
  std::vector<double> batch_means(n_batches, 0.0);
  std::vector<std::int64_t> batch_counts(n_batches, 0);

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> tmp(static_cast<std::size_t>(n) * n);
  for (std::int64_t s = 0; s < n_samples; ++s) {
    sample_increment_into(coeffs, dt, stream, inc);
    double value = 0.0;
    if (kind == CovKind::trace_trace) {
      double tg = 0.0, th = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          tg += g(i, k) * inc.d_sym(k, i);
          th += h(i, k) * inc.d_sym(k, i);
        }
      value = tg * th / dt;
    } else {
      // tr(G d_sym H d_sym)/dt
      mat_mul(g.data(), inc.d_sym.data(), tmp.data(), n);
      double tr = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) tr += tmp[i * n + k] * h(k, l) * inc.d_sym(l, i);
      value = tr / dt;
    }
    sum += value;
    sum_sq += value * value;
    const int b = static_cast<int>((s * n_batches) / n_samples);
    batch_means[b] += value;
    batch_counts[b] += 1;
  }
  for (int b = 0; b < n_batches; ++b) batch_means[b] /= static_cast<double>(batch_counts[b]);

  CovariationEstimate out;
  out.n_samples = n_samples;
  out.master_seed = rng.master_seed();
  out.stream_index = rng.stream_index();
  out.mean = sum / static_cast<double>(n_samples);
  const double var = (sum_sq - sum * sum / static_cast<double>(n_samples)) /
                     static_cast<double>(n_samples - 1);
  out.stderr_plain = std::sqrt(std::max(0.0, var) / static_cast<double>(n_samples));
  out.stderr_batch = batch_stderr(batch_means);
  return out;
}

double MatrixStat::max_z(const SquareMatrix& expected) const {
  double worst = 0.0;
  const int n = mean.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double se = stderr_of_mean(i, j);
      const double diff = std::abs(mean(i, j) - expected(i, j));
      worst = std::max(worst, se > 0.0 ? diff / se : (diff > 0.0 ? 1e300 : 0.0));
    }
  return worst;
}

namespace {

struct Accumulator {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  explicit Accumulator(std::size_t size) : sum(size, 0.0), sum_sq(size, 0.0) {}
  void add(std::size_t k, double v) {
    sum[k] += v;
    sum_sq[k] += v * v;
  }
  void finish(MatrixStat& stat, std::int64_t n_samples) const {
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double mean = sum[k] / n_samples;
      const double var = (sum_sq[k] - sum[k] * mean) / (n_samples - 1);
      stat.mean.data()[k] = mean;
      stat.stderr_of_mean.data()[k] = std::sqrt(std::max(0.0, var) / n_samples);
    }
  }
};

}  // namespace

NoiseMomentChecks noise_moment_checks(int n, double dt, std::int64_t n_samples,
                                      const RngStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("noise_moment_checks: need n_samples >= 2");
  const NoiseCoefficients coeffs = noise_coefficients(n);
  NoiseMomentChecks out(n);
  NoiseIncrement inc(n);
  RngStream stream(rng.master_seed(), rng.stream_index());

  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<double> db(nn), prod(nn);
  Accumulator a_mean(nn), a_bb(nn), a_btb(nn), a_sym(nn), a_skew(nn);
  const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
  double cross = 0.0, cross_sq = 0.0;
  for (std::int64_t s = 0; s < n_samples; ++s) {
    sample_increment_into(coeffs, dt, stream, inc);
    for (std::size_t k = 0; k < nn; ++k) db[k] = inc.d_sym.data()[k] + inc.d_skew.data()[k];

    for (std::size_t k = 0; k < nn; ++k) a_mean.add(k, db[k] * inv_sqrt_dt);

    mat_mul(db.data(), db.data(), prod.data(), n);
    for (std::size_t k = 0; k < nn; ++k) a_bb.add(k, prod[k] / dt);

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += db[k * n + i] * db[k * n + j];
        a_btb.add(static_cast<std::size_t>(i) * n + j, v / dt);
      }

    mat_mul(inc.d_sym.data(), inc.d_sym.data(), prod.data(), n);
    for (std::size_t k = 0; k < nn; ++k) a_sym.add(k, prod[k] / dt);

    mat_mul(inc.d_skew.data(), inc.d_skew.data(), prod.data(), n);
    for (std::size_t k = 0; k < nn; ++k) a_skew.add(k, prod[k] / dt);

    const double c = inc.d_sym(0, 1) * inc.d_skew(0, 1) / dt;
    cross += c;
    cross_sq += c * c;
  }
  a_mean.finish(out.mean_over_sqrt_dt, n_samples);
  a_bb.finish(out.bb_over_dt, n_samples);
  a_btb.finish(out.btb_over_dt, n_samples);
  a_sym.finish(out.sym_sq_over_dt, n_samples);
  a_skew.finish(out.skew_sq_over_dt, n_samples);
  out.cross_sym_skew = cross / n_samples;
  const double cross_var = (cross_sq - cross * out.cross_sym_skew) / (n_samples - 1);
  out.cross_stderr = std::sqrt(std::max(0.0, cross_var) / n_samples);
  out.n_samples = n_samples;
  return out;
}

}  // namespace slngbm
