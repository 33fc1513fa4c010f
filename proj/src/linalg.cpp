#include "sglasso/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sglasso {

std::optional<Matrix> cholesky(const Matrix& m) {
  require_square(m, "cholesky");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

EigenDecomposition sym_eigen(const Matrix& m) {
  require_square(m, "sym_eigen");
  const std::size_t n = m.rows();
  Matrix a = symmetrize(m);
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

SpdCheck spd_check(const Matrix& m) {
  const auto eig = sym_eigen(m);
  const double lo = eig.values.front();
  return {lo > 0.0, lo};
}

double log_det(const Matrix& m) {
  const auto l = cholesky(m);
  if (!l) throw NotPositiveDefinite("log_det: matrix is not positive definite");
  double s = 0.0;
  for (std::size_t i = 0; i < l->rows(); ++i) s += std::log((*l)(i, i));
  return 2.0 * s;
}

namespace {

// Solves L L^T x = b in place.
void cholesky_solve_inplace(const Matrix& l, std::span<double> x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
}

}  // namespace

Matrix inverse_spd(const Matrix& m) {
  const auto l = cholesky(m);
  if (!l) throw NotPositiveDefinite("inverse_spd: matrix is not positive definite");
  const std::size_t n = m.rows();
  Matrix inv(n, n);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    cholesky_solve_inplace(*l, col);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return symmetrize(inv);
}

std::vector<double> solve_spd(const Matrix& m, std::span<const double> b) {
  if (b.size() != m.rows()) throw DimensionError("solve_spd: right-hand side length");
  const auto l = cholesky(m);
  if (!l) throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
  std::vector<double> x(b.begin(), b.end());
  cholesky_solve_inplace(*l, x);
  return x;
}

double spectral_norm_sym(const Matrix& m) {
  const auto eig = sym_eigen(m);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

Matrix sample_covariance(const Matrix& data) {
  if (data.rows() == 0) throw DimensionError("sample_covariance: need at least one row");
  Matrix s = matmul_tn(data, data);
  s *= 1.0 / static_cast<double>(data.rows());
  return symmetrize(s);
}

Matrix demean_columns(const Matrix& data) {
  Matrix out = data;
  if (data.rows() == 0) return out;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) mean += data(i, j);
    mean /= static_cast<double>(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) out(i, j) -= mean;
  }
  return out;
}

}  // namespace sglasso
