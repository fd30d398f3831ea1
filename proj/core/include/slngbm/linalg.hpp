#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace slngbm {

/// Dense n-by-n real matrix, row-major, 64-bit entries. The workhorse type
/// for the flow matrix F, the Gram matrix G and noise increments.
///
/// Construction enforces n >= 2 and finite entries; arithmetic helpers that
/// run in hot loops live as free kernels below and skip revalidation.
class SquareMatrix {
 public:
  SquareMatrix(int n, std::vector<double> entries);
  static SquareMatrix zero(int n);
  static SquareMatrix identity(int n);
  static SquareMatrix diagonal(std::span<const double> diag);

  int dim() const { return n_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

 private:
  struct Unchecked {};
  SquareMatrix(int n, Unchecked) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}
  int n_;
  std::vector<double> data_;
};

bool operator==(const SquareMatrix& a, const SquareMatrix& b);

/// Trace powers of the Gram matrix recorded along a trajectory, together
/// with log|det F| as the SL(n) diagnostic.
struct GramSummary {
  std::vector<double> trace_powers;  // tr G, tr G^2, ..., tr G^{p_max}
  double log_det = 0.0;              // ln|det F|
  double tau = 0.0;                  // time of the record

  /// Validates positivity of tr G, tr G^2 and the power-mean ordering
  /// tr G^p <= (tr G)^p (tiny relative slack for roundoff).
  void validate() const;
};

// ---- raw kernels (no allocation, no validation) ----
// All matrices are n*n row-major buffers of the same dimension.

void mat_mul(const double* a, const double* b, double* out, int n);
void mat_add_scaled(double* a, const double* b, double s, int n);  // a += s*b
void mat_scale(double* a, double s, int n);
void mat_copy(const double* a, double* out, int n);
void mat_set_identity(double* a, int n);
double mat_trace(const double* a, int n);
double mat_max_abs(const double* a, int n);
double mat_one_norm(const double* a, int n);  // max column sum of |entries|

/// out = (a^T a + (a^T a)^T)/2, exact symmetrization of the product.
void gram_into(const double* f, double* out, int n);

/// Matrix exponential of a row-major buffer by scaling-and-squaring with a
/// truncated Taylor series; needs two n*n scratch buffers.
void expm_into(const double* m, double* out, double tol, int n, double* scratch1, double* scratch2);

// ---- public operations ----

/// Gram matrix G = F^T F, symmetrized exactly.
SquareMatrix gram(const SquareMatrix& f);

/// tr(G^p) by repeated multiplication (p-1 products).
double trace_power(const SquareMatrix& g, int p);

/// tr(G^p) as the p-th power-sum of the eigenvalues of symmetric G.
/// Independent of the multiplication route; the two agree to ~1e-10
/// relative on well-conditioned inputs.
double trace_power_eig(const SquareMatrix& g, int p);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> sym_eigenvalues(const SquareMatrix& g);

/// exp(M) with truncation tolerance tol in (0, 1e-6]. exp(0) is the identity
/// exactly; trace-free M keeps |log det exp(M)| within ~10*tol.
SquareMatrix matrix_exp(const SquareMatrix& m, double tol);

/// ln|det F| via LU with partial pivoting. Throws on (near-)singular input.
double log_det(const SquareMatrix& f);

/// Builds the checkpoint record for the flow matrix f at time tau.
GramSummary make_gram_summary(const SquareMatrix& f, int p_max, double tau);

}  // namespace slngbm
