// Fixed-dimension variants of the dense kernels for the Monte Carlo hot
// loops. Same algorithms and summation order as the generic versions in
// linalg.cpp, so results are bit-identical; the compile-time bound just lets
// the compiler unroll. Internal to the library.
#pragma once

#include <algorithm>
#include <cmath>

#include "slngbm/linalg.hpp"

namespace slngbm::detail {

template <int N>
inline void mul_t(const double* a, const double* b, double* out) {
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k) s += a[i * N + k] * b[k * N + j];
      out[i * N + j] = s;
    }
  }
}

template <int N>
inline void gram_t(const double* f, double* out) {
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k) s += f[k * N + i] * f[k * N + j];
      out[i * N + j] = s;
      out[j * N + i] = s;
    }
  }
}

template <int N>
inline void expm_t(const double* m, double* out, double tol, double* term, double* tmp) {
  const double norm = mat_one_norm(m, N);
  const double theta = 0.5;
  int squarings = 0;
  double scale = 1.0;
  if (norm > theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta)));
    scale = std::ldexp(1.0, -squarings);
  }
  const double target = tol * std::ldexp(1.0, -squarings) * 0.25;

  mat_set_identity(out, N);
  mat_copy(m, term, N);
  mat_scale(term, scale, N);
  double term_norm = mat_one_norm(term, N);
  int k = 1;
  while (term_norm > 0.0) {
    mat_add_scaled(out, term, 1.0, N);
    if (term_norm * theta / (1.0 - theta) <= target) break;
    ++k;
    if (k > 64) break;
    mul_t<N>(term, m, tmp);
    mat_scale(tmp, scale / k, N);
    mat_copy(tmp, term, N);
    term_norm = mat_one_norm(tmp, N);
  }
  for (int s = 0; s < squarings; ++s) {
    mul_t<N>(out, out, tmp);
    mat_copy(tmp, out, N);
  }
}

enum class SchemeTag { euler, exponential };

template <int N>
inline void apply_step_t(SchemeTag scheme, double* f, const double* db, double tol, double* t1,
                         double* t2, double* t3) {
  if (scheme == SchemeTag::euler) {
    mul_t<N>(f, db, t1);
    mat_add_scaled(f, t1, 1.0, N);
  } else {
    expm_t<N>(db, t1, tol, t2, t3);
    mul_t<N>(f, t1, t2);
    mat_copy(t2, f, N);
  }
}

inline void apply_step(SchemeTag scheme, int n, double* f, const double* db, double tol,
                       double* t1, double* t2, double* t3) {
  switch (n) {
    case 2: apply_step_t<2>(scheme, f, db, tol, t1, t2, t3); return;
    case 3: apply_step_t<3>(scheme, f, db, tol, t1, t2, t3); return;
    case 4: apply_step_t<4>(scheme, f, db, tol, t1, t2, t3); return;
    case 5: apply_step_t<5>(scheme, f, db, tol, t1, t2, t3); return;
    default: break;
  }
  if (scheme == SchemeTag::euler) {
    mat_mul(f, db, t1, n);
    mat_add_scaled(f, t1, 1.0, n);
  } else {
    expm_into(db, t1, tol, n, t2, t3);
    mat_mul(f, t1, t2, n);
    mat_copy(t2, f, n);
  }
}

}  // namespace slngbm::detail
