#pragma once

#include <stdexcept>
#include <vector>

#include "sglasso/matrix.hpp"
#include "sglasso/penalty.hpp"

namespace sglasso {

struct SolverConfig {
  double rho = 1.0;
  /// Rebalance rho when the primal and dual residuals drift apart by more
  /// than a factor of 10. The iteration is monotone only with this off.
  bool adaptive_rho = true;
  int max_iters = 10000;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  /// Value threshold for support extraction when no sparse iterate exists
  /// (the unpenalized path), and the KKT zero tolerance.
  double zero_tol = 1e-6;
  /// Keep the per-iteration combined residual in PrecisionEstimate::history.
  bool record_history = false;

  void validate() const;
};

struct PrecisionEstimate {
  /// Symmetric positive-definite estimate. Entries outside `support` are
  /// exactly zero.
  Matrix omega;
  /// Symmetric, all-true diagonal. Read from the exactly sparse splitting
  /// iterate; (i, j) is false only if both Z_ij and Z_ji are exactly zero.
  BoolMatrix support;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  /// sqrt(rho * (||dZ||^2 + ||dU||^2)) per iteration, when requested. With a
  /// fixed rho the splitting iteration contracts this monotonically.
  std::vector<double> history;
};

/// Thrown for lambda == 0 with a singular sample covariance.
class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// -log det(omega) + tr(omega * sigma_hat) + lambda * penalty(spec, omega).
double penalized_objective(const Matrix& omega, const Matrix& sigma_hat, double lambda,
                           const PenaltySpec& spec);

/// argmin_X -log det X + tr(X S) + (rho / 2) ||X - A||_F^2, in closed form
/// through the eigendecomposition of rho * A - S.
Matrix prox_logdet(const Matrix& a, const Matrix& sigma_hat, double rho);

/// Penalized Gaussian likelihood estimate by two-block splitting:
/// Omega carries the log-det term, Z the penalty, and U the scaled dual.
PrecisionEstimate solve(const Matrix& sigma_hat, double lambda, const PenaltySpec& spec,
                        const SolverConfig& cfg = {});

/// Frobenius norm of the minimal-norm element of
/// -omega^{-1} + sigma_hat + lambda * subdiff penalty(omega), over symmetric
/// matrices. Entries with |omega_ij| <= zero_tol are treated as zeros.
double kkt_residual(const Matrix& omega, const Matrix& sigma_hat, double lambda,
                    const PenaltySpec& spec, double zero_tol = 0.0);

/// Slow independent oracle for small problems (p <= 6): projected
/// subgradient descent over the PD cone followed by a fixed-support smooth
/// refinement. Returns the best iterate found; `history` holds the
/// best-so-far objective sequence.
PrecisionEstimate reference_solve(const Matrix& sigma_hat, double lambda, const PenaltySpec& spec,
                                  int iters = 20000);

/// Degree-weighted lasso with per-entry weight (d_i + d_j), degrees taken
/// from the true precision matrix omega0.
PrecisionEstimate solve_weighted_from_truth(const Matrix& sigma_hat, double lambda,
                                            const Matrix& omega0, const SolverConfig& cfg = {});

}  // namespace sglasso
