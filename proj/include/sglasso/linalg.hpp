#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "sglasso/matrix.hpp"

namespace sglasso {

/// Raised when an operation needs a positive-definite matrix and the
/// Cholesky factorization meets a non-positive pivot.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpdCheck {
  bool is_pd = false;
  double min_eigenvalue = 0.0;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

/// Lower-triangular L with L L^T == m, or nullopt on a pivot <= 0.
std::optional<Matrix> cholesky(const Matrix& m);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
EigenDecomposition sym_eigen(const Matrix& m);

/// Q diag(f(lambda)) Q^T for a precomputed decomposition.
template <class F>
Matrix spectral_map(const EigenDecomposition& eig, F&& f) {
  const std::size_t n = eig.values.size();
  std::vector<double> mapped(n);
  for (std::size_t k = 0; k < n; ++k) mapped[k] = f(eig.values[k]);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += eig.vectors(i, k) * mapped[k] * eig.vectors(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

SpdCheck spd_check(const Matrix& m);

/// 2 * sum(log L_ii); throws NotPositiveDefinite.
double log_det(const Matrix& m);

/// Inverse of an SPD matrix via Cholesky; throws NotPositiveDefinite.
Matrix inverse_spd(const Matrix& m);

/// Solves m x = b for SPD m.
std::vector<double> solve_spd(const Matrix& m, std::span<const double> b);

/// Spectral norm of a symmetric matrix.
double spectral_norm_sym(const Matrix& m);

/// (1/n) X^T X with no centering. Model data here is mean zero.
Matrix sample_covariance(const Matrix& data);

/// Subtracts each column's mean.
Matrix demean_columns(const Matrix& data);

}  // namespace sglasso
