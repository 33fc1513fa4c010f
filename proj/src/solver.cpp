#include "sglasso/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sglasso/linalg.hpp"

namespace sglasso {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("solver: rho must be > 0");
  if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0) || !(zero_tol > 0.0))
    throw std::invalid_argument("solver: tolerances must be > 0");
}

double penalized_objective(const Matrix& omega, const Matrix& sigma_hat, double lambda,
                           const PenaltySpec& spec) {
  return -log_det(omega) + trace_product(omega, sigma_hat) + penalty_value(spec, omega, lambda);
}

Matrix prox_logdet(const Matrix& a, const Matrix& sigma_hat, double rho) {
  require_same_shape(a, sigma_hat, "prox_logdet");
  if (!(rho > 0.0)) throw std::invalid_argument("prox_logdet: rho must be > 0");
  Matrix b = a;
  b *= rho;
  b -= sigma_hat;
  const auto eig = sym_eigen(b);
  // Positive root of rho w^2 - g w - 1 = 0, written to avoid cancellation.
  return spectral_map(eig, [rho](double g) {
    const double r = std::sqrt(g * g + 4.0 * rho);
    return g >= 0.0 ? (g + r) / (2.0 * rho) : 2.0 / (r - g);
  });
}

namespace {

Matrix masked(const Matrix& m, const BoolMatrix& support) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!support(i, j)) out(i, j) = 0.0;
  return out;
}

BoolMatrix support_from_values(const Matrix& m, double zero_tol) {
  const std::size_t p = m.rows();
  BoolMatrix s(p);
  for (std::size_t i = 0; i < p; ++i) {
    s.set(i, i, true);
    for (std::size_t j = i + 1; j < p; ++j)
      s.set_symmetric(i, j, std::abs(m(i, j)) > zero_tol || std::abs(m(j, i)) > zero_tol);
  }
  return s;
}

PrecisionEstimate finish(Matrix omega, BoolMatrix support, const Matrix& sigma_hat, double lambda,
                         const PenaltySpec& spec, double zero_tol) {
  PrecisionEstimate est;
  Matrix sparse = masked(omega, support);
  // Zeroing entries that sit within the primal tolerance of an exact zero
  // keeps the matrix PD; fall back to the raw iterate if it ever does not.
  if (cholesky(sparse)) omega = std::move(sparse);
  est.objective = penalized_objective(omega, sigma_hat, lambda, spec);
  est.kkt_residual = kkt_residual(omega, sigma_hat, lambda, spec, zero_tol);
  est.omega = std::move(omega);
  est.support = std::move(support);
  return est;
}

}  // namespace

PrecisionEstimate solve(const Matrix& sigma_hat, double lambda, const PenaltySpec& spec,
                        const SolverConfig& cfg) {
  require_square(sigma_hat, "solve");
  if (!is_symmetric(sigma_hat, 1e-12 * std::max(1.0, max_abs(sigma_hat))))
    throw std::invalid_argument("solve: sample covariance must be symmetric");
  if (!(lambda >= 0.0)) throw std::invalid_argument("solve: lambda must be >= 0");
  cfg.validate();
  const std::size_t p = sigma_hat.rows();
  spec.validate(p);
  const Matrix s = symmetrize(sigma_hat);

  if (lambda == 0.0) {
    if (!cholesky(s))
      throw InfeasibleProblem("solve: lambda = 0 needs a positive-definite sample covariance");
    Matrix inv = inverse_spd(s);
    auto support = support_from_values(inv, cfg.zero_tol);
    auto est = finish(std::move(inv), std::move(support), s, 0.0, spec, cfg.zero_tol);
    est.converged = true;
    return est;
  }

  Matrix z(p, p);
  for (std::size_t i = 0; i < p; ++i) z(i, i) = 1.0 / (s(i, i) > 0.0 ? s(i, i) + lambda : 1.0);
  Matrix u(p, p);
  Matrix omega;
  Matrix z_prev;
  PrecisionEstimate est;
  int iter = 0;
  bool converged = false;
  double rho = cfg.rho;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    omega = prox_logdet(z - u, s, rho);
    z_prev = std::move(z);
    z = prox_penalty(omega + u, spec, lambda, 1.0 / rho);
    const Matrix r = omega - z;
    u += r;

    const double r_norm = frobenius_norm(r);
    const double dz_norm = frobenius_norm(z - z_prev);
    if (cfg.record_history) est.history.push_back(std::sqrt(rho * (dz_norm * dz_norm + r_norm * r_norm)));
    const double scale = std::max(frobenius_norm(omega), frobenius_norm(z));
    if (r_norm <= cfg.tol_primal * scale && rho * dz_norm <= cfg.tol_dual) {
      converged = true;
      break;
    }
    // Residual balancing. Frozen for the second half of the budget so the
    // tail runs with a fixed step. u is the scaled dual, so it moves with 1/rho.
    if (cfg.adaptive_rho && iter % 10 == 0 && iter <= cfg.max_iters / 2) {
      const double dual = rho * dz_norm;
      double factor = 1.0;
      if (r_norm > 10.0 * dual) factor = 2.0;
      else if (dual > 10.0 * r_norm) factor = 0.5;
      if (factor != 1.0 && rho * factor >= 1e-6 && rho * factor <= 1e8) {
        rho *= factor;
        u *= 1.0 / factor;
      }
    }
  }

  BoolMatrix support(p);
  for (std::size_t i = 0; i < p; ++i) {
    support.set(i, i, true);
    for (std::size_t j = i + 1; j < p; ++j)
      support.set_symmetric(i, j, z(i, j) != 0.0 || z(j, i) != 0.0);
  }
  auto history = std::move(est.history);
  est = finish(std::move(omega), std::move(support), s, lambda, spec, cfg.zero_tol);
  est.history = std::move(history);
  est.iterations = std::min(iter, cfg.max_iters);
  est.converged = converged;
  return est;
}

double kkt_residual(const Matrix& omega, const Matrix& sigma_hat, double lambda,
                    const PenaltySpec& spec, double zero_tol) {
  require_same_shape(omega, sigma_hat, "kkt_residual");
  const std::size_t p = omega.rows();
  const Matrix grad = sigma_hat - inverse_spd(omega);
  const Matrix slope = penalty_slope(spec, omega, lambda);
  double sum = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double g = 0.5 * (grad(i, j) + grad(j, i));
      const double w = slope(i, j);
      const double x = omega(i, j);
      double r;
      if (std::abs(x) > zero_tol) r = g + w * (x > 0.0 ? 1.0 : -1.0);
      else r = std::max(std::abs(g) - w, 0.0);
      sum += r * r;
    }
  }
  return std::sqrt(sum);
}

namespace {

// Eigenvalue floor projection onto {X : X >= floor * I}.
Matrix project_pd(const Matrix& m, double floor) {
  const auto eig = sym_eigen(m);
  return spectral_map(eig, [floor](double v) { return std::max(v, floor); });
}

double safe_objective(const Matrix& omega, const Matrix& s, double lambda, const PenaltySpec& spec) {
  if (!cholesky(omega)) return std::numeric_limits<double>::infinity();
  return penalized_objective(omega, s, lambda, spec);
}

// Penalty with |x_ij| replaced by a signed value a_ij, which makes it a
// smooth function of a. Equals penalty_value when a >= 0.
double signed_penalty(const PenaltySpec& spec, const Matrix& a, double lambda) {
  const std::size_t p = a.rows();
  const bool diag = spec.penalize_diagonal;
  std::vector<double> col(p, 0.0);
  double weighted = 0.0;
  const auto* w = std::get_if<penalty_kind::WeightedL11>(&spec.kind);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (diag || i != j) {
        col[j] += a(i, j);
        if (w) weighted += w->weights(i, j) * a(i, j);
      }
  double lin = 0.0;
  double sq = 0.0;
  for (double c : col) {
    lin += c;
    sq += c * c;
  }
  if (std::holds_alternative<penalty_kind::L11>(spec.kind)) return lambda * lin;
  if (std::holds_alternative<penalty_kind::L12Sq>(spec.kind)) return lambda * sq;
  if (w) return lambda * weighted;
  const auto& c = std::get<penalty_kind::Combined>(spec.kind);
  return lambda * (c.lambda1 * lin + c.lambda2 * sq);
}

// Minimizes the objective over symmetric matrices whose off-pattern entries
// are zero and whose on-pattern entries keep the signs in `sign`. With the
// signs frozen the penalty is smooth, so plain gradient descent with
// backtracking converges.
Matrix refine_on_support(Matrix omega, const Matrix& sign, const BoolMatrix& pattern,
                         const Matrix& s, double lambda, const PenaltySpec& spec) {
  const std::size_t p = omega.rows();
  auto signed_part = [&](const Matrix& x) {
    Matrix out(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) out(i, j) = sign(i, j) * x(i, j);
    return out;
  };
  auto signed_objective = [&](const Matrix& x) {
    if (!cholesky(x)) return std::numeric_limits<double>::infinity();
    return -log_det(x) + trace_product(x, s) + signed_penalty(spec, signed_part(x), lambda);
  };
  auto gradient = [&](const Matrix& x) {
    const Matrix slope = penalty_slope(spec, signed_part(x), lambda);
    const Matrix inv = inverse_spd(x);
    Matrix g(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (pattern(i, j)) g(i, j) = s(i, j) - inv(i, j) + slope(i, j) * sign(i, j);
    return symmetrize(g);
  };

  double f = signed_objective(omega);
  double step = 1e-2;
  for (int it = 0; it < 20000; ++it) {
    const Matrix g = gradient(omega);
    const double gn2 = std::pow(frobenius_norm(g), 2);
    if (gn2 < 1e-26) break;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Matrix trial = omega - step * g;
      const double ft = signed_objective(trial);
      if (ft <= f - 1e-4 * step * gn2) {
        omega = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }
  return omega;
}

}  // namespace

PrecisionEstimate reference_solve(const Matrix& sigma_hat, double lambda, const PenaltySpec& spec,
                                  int iters) {
  require_square(sigma_hat, "reference_solve");
  const std::size_t p = sigma_hat.rows();
  if (p > 6) throw std::invalid_argument("reference_solve: only for p <= 6");
  if (!(lambda >= 0.0)) throw std::invalid_argument("reference_solve: lambda must be >= 0");
  spec.validate(p);
  const Matrix s = symmetrize(sigma_hat);
  constexpr double kFloor = 1e-8;

  Matrix x(p, p);
  for (std::size_t i = 0; i < p; ++i) x(i, i) = 1.0 / (s(i, i) + lambda + 1e-3);
  Matrix best = x;
  double best_f = safe_objective(x, s, lambda, spec);
  std::vector<double> best_history;
  best_history.reserve(static_cast<std::size_t>(iters) + 8);

  // Subgradient: the residual-minimizing choice at zeros, sign slope elsewhere.
  const double step0 = 0.5 / (1.0 + max_abs(s));
  for (int k = 0; k < iters; ++k) {
    const Matrix inv = inverse_spd(x);
    const Matrix slope = penalty_slope(spec, x, lambda);
    Matrix g(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double smooth = s(i, j) - inv(i, j);
        const double xv = x(i, j);
        if (xv != 0.0) g(i, j) = smooth + slope(i, j) * (xv > 0.0 ? 1.0 : -1.0);
        else g(i, j) = std::copysign(std::max(std::abs(smooth) - slope(i, j), 0.0), smooth);
      }
    g = symmetrize(g);
    const double gn = frobenius_norm(g);
    if (gn == 0.0) break;
    const double step = step0 / std::sqrt(1.0 + k) / std::max(1.0, gn);
    x = project_pd(x - step * g, kFloor);
    const double f = safe_objective(x, s, lambda, spec);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
    best_history.push_back(best_f);
  }

  // Fixed-support refinement from the subgradient iterate, over several
  // candidate zero patterns; a candidate is kept only if it improves the
  // true objective.
  const double scale = max_abs(best);
  for (double rel : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1}) {
    BoolMatrix pattern(p);
    Matrix sign(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const bool keep = i == j || std::abs(best(i, j)) > rel * scale;
        pattern.set(i, j, keep);
        sign(i, j) = best(i, j) >= 0.0 ? 1.0 : -1.0;
      }
    Matrix start = best;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (!pattern(i, j)) start(i, j) = 0.0;
    if (!cholesky(start)) continue;
    const Matrix refined = refine_on_support(start, sign, pattern, s, lambda, spec);
    const double f = safe_objective(refined, s, lambda, spec);
    if (f < best_f) {
      best_f = f;
      best = refined;
    }
    best_history.push_back(best_f);
  }

  PrecisionEstimate est;
  est.omega = best;
  est.support = support_from_values(best, 0.0);
  est.objective = best_f;
  est.iterations = iters;
  est.converged = true;
  est.kkt_residual = kkt_residual(best, s, lambda, spec, 1e-9);
  est.history = std::move(best_history);
  return est;
}

PrecisionEstimate solve_weighted_from_truth(const Matrix& sigma_hat, double lambda,
                                            const Matrix& omega0, const SolverConfig& cfg) {
  require_same_shape(sigma_hat, omega0, "solve_weighted_from_truth");
  Matrix w = degree_penalty_matrix(omega0);
  w *= 2.0;
  return solve(sigma_hat, lambda, PenaltySpec::weighted(std::move(w)), cfg);
}

}  // namespace sglasso
