#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sglasso/matrix.hpp"

namespace sglasso {

/// Weighted degrees d_j = sum_k |m_jk|.
using DegreeVector = std::vector<double>;

namespace penalty_kind {
/// Entrywise lasso, sum |m_ij|.
struct L11 {};
/// Squared mixed norm, sum_j (sum_i |m_ij|)^2.
struct L12Sq {};
/// sum w_ij |m_ij| with a symmetric non-negative weight matrix.
struct WeightedL11 {
  Matrix weights;
};
/// lambda1 * L11 + lambda2 * L12Sq.
struct Combined {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};
}  // namespace penalty_kind

using PenaltyKind = std::variant<penalty_kind::L11, penalty_kind::L12Sq,
                                 penalty_kind::WeightedL11, penalty_kind::Combined>;

struct PenaltySpec {
  PenaltyKind kind = penalty_kind::L11{};
  bool penalize_diagonal = true;

  static PenaltySpec glasso(bool penalize_diagonal = true);
  static PenaltySpec sglasso(bool penalize_diagonal = true);
  static PenaltySpec weighted(Matrix weights, bool penalize_diagonal = true);
  static PenaltySpec combined(double lambda1, double lambda2, bool penalize_diagonal = true);

  /// Throws std::invalid_argument when the invariants fail (negative or
  /// asymmetric weights, negative combined coefficients, both zero).
  void validate(std::size_t p) const;

  std::string name() const;
};

double l11_norm(const Matrix& m);
double l12_sq_norm(const Matrix& m);

DegreeVector weighted_degrees(const Matrix& m);

/// Symmetric matrix with entries (d_i + d_j) / 2 built from the degrees of
/// omega0. Twice this matrix is the per-entry weight of the degree-weighted
/// lasso, sum_ij (d_i + d_j) |m_ij| == 2 sum_ij d_j |m_ij|.
Matrix degree_penalty_matrix(const Matrix& omega0);

/// lambda * penalty(m) for the given PenaltySpec.
double penalty_value(const PenaltySpec& spec, const Matrix& m, double lambda);

/// sign(v_i) * max(|v_i| - t * w_i, 0). Entries inside the threshold come
/// back as exact zeros.
std::vector<double> prox_soft_threshold(std::span<const double> v, double t,
                                        std::span<const double> weights);

/// argmin_x c * (sum_i |x_i|)^2 + 0.5 * ||x - v||^2.
std::vector<double> prox_sq_l1(std::span<const double> v, double c);

/// Prox of scale * lambda * penalty(spec) applied to a (possibly asymmetric)
/// square matrix. L12Sq and Combined act column by column.
Matrix prox_penalty(const Matrix& v, const PenaltySpec& spec, double lambda, double scale);

/// Per-entry slope of lambda * penalty at a symmetric m: the subdifferential
/// restricted to symmetric matrices is slope_ij * sign(m_ij) where m_ij != 0
/// and slope_ij * [-1, 1] where m_ij == 0.
Matrix penalty_slope(const PenaltySpec& spec, const Matrix& m, double lambda);

}  // namespace sglasso
