#include "slngbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace slngbm {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SquareMatrix::SquareMatrix(int n, std::vector<double> entries) : n_(n), data_(std::move(entries)) {
  require(n >= 2, "SquareMatrix: dimension must be >= 2");
  require(data_.size() == static_cast<std::size_t>(n) * n, "SquareMatrix: entry count != n*n");
  for (double v : data_) require(std::isfinite(v), "SquareMatrix: non-finite entry");
}

SquareMatrix SquareMatrix::zero(int n) {
  require(n >= 2, "SquareMatrix: dimension must be >= 2");
  return SquareMatrix(n, Unchecked{});
}

SquareMatrix SquareMatrix::identity(int n) {
  SquareMatrix m = zero(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
  SquareMatrix m = zero(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = diag[i];
  return m;
}

double SquareMatrix::trace() const { return mat_trace(data_.data(), n_); }
double SquareMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}
double SquareMatrix::max_abs() const { return mat_max_abs(data_.data(), n_); }
bool SquareMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool operator==(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.dim() != b.dim()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

void GramSummary::validate() const {
  if (trace_powers.empty() || trace_powers[0] <= 0.0)
    throw std::runtime_error("GramSummary: tr G must be positive");
  if (trace_powers.size() >= 2 && trace_powers[1] <= 0.0)
    throw std::runtime_error("GramSummary: tr G^2 must be positive");
  const double tr_g = trace_powers[0];
  double power = tr_g;
  for (std::size_t p = 2; p <= trace_powers.size(); ++p) {
    power *= tr_g;
    if (trace_powers[p - 1] > power * (1.0 + 1e-12))
      throw std::runtime_error("GramSummary: tr G^p exceeds (tr G)^p");
  }
}

// ---- kernels ----

void mat_mul(const double* a, const double* b, double* out, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * b[k * n + j];
      out[i * n + j] = s;
    }
  }
}

void mat_add_scaled(double* a, const double* b, double s, int n) {
  const int m = n * n;
  for (int i = 0; i < m; ++i) a[i] += s * b[i];
}

void mat_scale(double* a, double s, int n) {
  const int m = n * n;
  for (int i = 0; i < m; ++i) a[i] *= s;
}

void mat_copy(const double* a, double* out, int n) { std::copy(a, a + n * n, out); }

void mat_set_identity(double* a, int n) {
  std::fill(a, a + n * n, 0.0);
  for (int i = 0; i < n; ++i) a[i * n + i] = 1.0;
}

double mat_trace(const double* a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i * n + i];
  return s;
}

double mat_max_abs(const double* a, int n) {
  double m = 0.0;
  const int k = n * n;
  for (int i = 0; i < k; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double mat_one_norm(const double* a, int n) {
  double m = 0.0;
  for (int j = 0; j < n; ++j) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += std::abs(a[i * n + j]);
    m = std::max(m, c);
  }
  return m;
}

void gram_into(const double* f, double* out, int n) {
  // G_ij = sum_k f_ki f_kj; computing only i<=j and mirroring makes the
  // result exactly symmetric.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += f[k * n + i] * f[k * n + j];
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  }
}

void expm_into(const double* m, double* out, double tol, int n, double* term, double* tmp) {
  const double norm = mat_one_norm(m, n);
  // Scale so the Taylor argument has norm <= theta, then square back.
  const double theta = 0.5;
  int squarings = 0;
  double scale = 1.0;
  if (norm > theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta)));
    scale = std::ldexp(1.0, -squarings);
  }
  // Geometric tail bound: after term k, the remainder is below
  // |term_k| * theta / (1 - theta); squaring amplifies by ~2^squarings.
  const double target = tol * std::ldexp(1.0, -squarings) * 0.25;

  mat_set_identity(out, n);
  mat_copy(m, term, n);
  mat_scale(term, scale, n);
  double term_norm = mat_one_norm(term, n);
  int k = 1;
  while (term_norm > 0.0) {
    mat_add_scaled(out, term, 1.0, n);
    if (term_norm * theta / (1.0 - theta) <= target) break;
    ++k;
    if (k > 64) break;  // tol >= DBL_MIN-ish always terminates far earlier
    mat_mul(term, m, tmp, n);
    mat_scale(tmp, scale / k, n);
    mat_copy(tmp, term, n);
    term_norm = mat_one_norm(term, n);
  }
  for (int s = 0; s < squarings; ++s) {
    mat_mul(out, out, tmp, n);
    mat_copy(tmp, out, n);
  }
}

// ---- public operations ----

SquareMatrix gram(const SquareMatrix& f) {
  if (!f.all_finite()) throw std::invalid_argument("gram: non-finite input");
  SquareMatrix g = SquareMatrix::zero(f.dim());
  gram_into(f.data(), g.data(), f.dim());
  return g;
}

double trace_power(const SquareMatrix& g, int p) {
  if (p < 1) throw std::invalid_argument("trace_power: p must be >= 1");
  const int n = g.dim();
  if (p == 1) return g.trace();
  std::vector<double> pow(g.data(), g.data() + g.size());
  std::vector<double> tmp(g.size());
  for (int k = 2; k <= p; ++k) {
    mat_mul(pow.data(), g.data(), tmp.data(), n);
    pow.swap(tmp);
  }
  return mat_trace(pow.data(), n);
}

std::vector<double> sym_eigenvalues(const SquareMatrix& g) {
  const int n = g.dim();
  std::vector<double> a(g.data(), g.data() + g.size());
  // Cyclic Jacobi; plenty for the small symmetric matrices used here.
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += a[i * n + i] * a[i * n + i];
    if (off <= 1e-30 * std::max(1.0, diag)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

double trace_power_eig(const SquareMatrix& g, int p) {
  if (p < 1) throw std::invalid_argument("trace_power_eig: p must be >= 1");
  double s = 0.0;
  for (double lam : sym_eigenvalues(g)) s += std::pow(lam, p);
  return s;
}

SquareMatrix matrix_exp(const SquareMatrix& m, double tol) {
  if (!m.all_finite()) throw std::invalid_argument("matrix_exp: non-finite input");
  if (!(tol > 0.0 && tol <= 1e-6)) throw std::invalid_argument("matrix_exp: tol must be in (0, 1e-6]");
  const int n = m.dim();
  SquareMatrix out = SquareMatrix::zero(n);
  std::vector<double> s1(out.size()), s2(out.size());
  expm_into(m.data(), out.data(), tol, n, s1.data(), s2.data());
  return out;
}

double log_det(const SquareMatrix& f) {
  const int n = f.dim();
  std::vector<double> a(f.data(), f.data() + f.size());
  double log_abs = 0.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) throw std::domain_error("log_det: matrix is singular");
    if (pivot != col)
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
    log_abs += std::log(std::abs(a[col * n + col]));
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= factor * a[col * n + k];
    }
  }
  return log_abs;
}

GramSummary make_gram_summary(const SquareMatrix& f, int p_max, double tau) {
  if (p_max < 1) throw std::invalid_argument("make_gram_summary: p_max must be >= 1");
  const int n = f.dim();
  SquareMatrix g = gram(f);
  GramSummary out;
  out.tau = tau;
  out.trace_powers.resize(p_max);
  std::vector<double> pow(g.data(), g.data() + g.size());
  std::vector<double> tmp(g.size());
  out.trace_powers[0] = mat_trace(pow.data(), n);
  for (int p = 2; p <= p_max; ++p) {
    mat_mul(pow.data(), g.data(), tmp.data(), n);
    pow.swap(tmp);
    out.trace_powers[p - 1] = mat_trace(pow.data(), n);
  }
  out.log_det = log_det(f);
  return out;
}

}  // namespace slngbm
