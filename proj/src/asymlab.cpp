#include "sglasso/asymlab.hpp"

#include <cmath>
#include <stdexcept>

#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"
#include "sglasso/simlab.hpp"

namespace sglasso {

LimitFlavor parse_flavor(const std::string& s) {
  if (s == "sglasso" || s == "sglasso_limit") return LimitFlavor::sglasso_limit;
  if (s == "glasso" || s == "glasso_limit") return LimitFlavor::glasso_limit;
  throw std::invalid_argument("unknown limit flavor: " + s);
}

std::string to_string(LimitFlavor f) {
  return f == LimitFlavor::sglasso_limit ? "sglasso" : "glasso";
}

LimitProblem LimitProblem::make(const Matrix& omega0, double lambda0) {
  require_square(omega0, "LimitProblem");
  if (!is_symmetric(omega0)) throw std::invalid_argument("LimitProblem: omega0 must be symmetric");
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("LimitProblem: lambda0 must be >= 0");
  LimitProblem lp;
  lp.omega0 = omega0;
  lp.sigma0 = inverse_spd(omega0);
  lp.lambda0 = lambda0;
  lp.degrees = weighted_degrees(omega0);
  const std::size_t p = omega0.rows();
  lp.zero_pattern = BoolMatrix(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) lp.zero_pattern.set(i, j, omega0(i, j) == 0.0);
  return lp;
}

std::vector<std::pair<std::size_t, std::size_t>> vech_index(std::size_t p) {
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  idx.reserve(p * (p + 1) / 2);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = j; i < p; ++i) idx.emplace_back(i, j);
  return idx;
}

Matrix isserlis_lambda(const Matrix& s) {
  require_square(s, "isserlis_lambda");
  const auto idx = vech_index(s.rows());
  const std::size_t m = idx.size();
  Matrix out(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const auto [i, j] = idx[a];
      const auto [k, l] = idx[b];
      out(a, b) = s(i, k) * s(j, l) + s(i, l) * s(j, k);
    }
  return out;
}

WSampler::WSampler(const Matrix& lambda_matrix) {
  require_square(lambda_matrix, "WSampler");
  const std::size_t m = lambda_matrix.rows();
  // m = p (p + 1) / 2
  const auto p = static_cast<std::size_t>(std::lround((std::sqrt(8.0 * static_cast<double>(m) + 1.0) - 1.0) / 2.0));
  if (p * (p + 1) / 2 != m) throw DimensionError("WSampler: size is not a vech dimension");
  p_ = p;
  root_ = spectral_map(sym_eigen(symmetrize(lambda_matrix)),
                       [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

Matrix WSampler::draw(Rng& rng) const {
  const std::size_t m = root_.rows();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(m);
  for (double& v : z) v = normal(rng);
  const auto idx = vech_index(p_);
  Matrix w(p_, p_);
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < m; ++b) s += root_(a, b) * z[b];
    const auto [i, j] = idx[a];
    w(i, j) = s;
    w(j, i) = s;
  }
  return w;
}

Matrix draw_w(const Matrix& lambda_matrix, Rng& rng) { return WSampler(lambda_matrix).draw(rng); }

Matrix limit_weights(const LimitProblem& problem, LimitFlavor flavor) {
  const std::size_t p = problem.omega0.rows();
  Matrix w(p, p, problem.lambda0);
  if (flavor == LimitFlavor::sglasso_limit)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        w(i, j) = problem.lambda0 * (problem.degrees[i] + problem.degrees[j]);
  return w;
}

namespace {

double g_term(const LimitProblem& lp, std::size_t i, std::size_t j, double u) {
  const double o = lp.omega0(i, j);
  if (o == 0.0) return std::abs(u);
  return o > 0.0 ? u : -u;
}

double smooth_part(const LimitProblem& lp, const Matrix& u, const Matrix& w) {
  const Matrix us = matmul(u, lp.sigma0);
  return trace_product(us, us) + trace_product(u, w);
}

double v_with_weights(const LimitProblem& lp, const Matrix& u, const Matrix& w, const Matrix& weights) {
  double pen = 0.0;
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j) pen += weights(i, j) * g_term(lp, i, j, u(i, j));
  return smooth_part(lp, u, w) + pen;
}

}  // namespace

double v_objective(const LimitProblem& problem, const Matrix& u, const Matrix& w, LimitFlavor flavor) {
  return v_with_weights(problem, u, w, limit_weights(problem, flavor));
}

double v_objective_column_form(const LimitProblem& problem, const Matrix& u, const Matrix& w) {
  const std::size_t p = u.rows();
  Matrix weights(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) weights(i, j) = 2.0 * problem.lambda0 * problem.degrees[j];
  return v_with_weights(problem, u, w, weights);
}

MinimizeResult minimize_v_weighted(const LimitProblem& problem, const Matrix& w,
                                   const Matrix& weights, const MinimizeOptions& opts) {
  const Matrix& s = problem.sigma0;
  const std::size_t p = s.rows();
  require_same_shape(w, s, "minimize_v");
  require_same_shape(weights, s, "minimize_v");
  const double norm = spectral_norm_sym(s);
  const double step = 1.0 / (2.0 * norm * norm);
  const Matrix wsym = symmetrize(w);

  // The sign tilt on the support is a constant gradient term.
  Matrix tilt(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double o = problem.omega0(i, j);
      if (o != 0.0) tilt(i, j) = weights(i, j) * (o > 0.0 ? 1.0 : -1.0);
    }

  MinimizeResult res;
  Matrix u(p, p);
  if (opts.record_objective) res.objective_history.push_back(v_with_weights(problem, u, wsym, weights));
  for (int it = 1; it <= opts.max_iters; ++it) {
    Matrix grad = matmul(matmul(s, u), s);
    grad *= 2.0;
    grad += wsym;
    grad += tilt;
    grad = symmetrize(grad);
    Matrix next = u - step * grad;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (problem.zero_pattern(i, j)) {
          const double v = next(i, j);
          const double t = step * weights(i, j);
          next(i, j) = std::abs(v) <= t ? 0.0 : v - std::copysign(t, v);
        }
    const double change = max_abs_diff(next, u);
    u = std::move(next);
    if (opts.record_objective) res.objective_history.push_back(v_with_weights(problem, u, wsym, weights));
    res.iterations = it;
    if (change <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.u = std::move(u);
  return res;
}

MinimizeResult minimize_v_detail(const LimitProblem& problem, const Matrix& w, LimitFlavor flavor,
                                 const MinimizeOptions& opts) {
  return minimize_v_weighted(problem, w, limit_weights(problem, flavor), opts);
}

Matrix minimize_v(const LimitProblem& problem, const Matrix& w, LimitFlavor flavor) {
  auto res = minimize_v_detail(problem, w, flavor);
  if (!res.converged) throw LimitNonConvergence("minimize_v: no convergence after 100000 iterations");
  return std::move(res.u);
}

ZeroMassResult zero_mass(const LimitProblem& problem, LimitFlavor flavor, std::size_t n_draws,
                         std::uint64_t master_seed, double zero_tol, bool keep_samples,
                         unsigned threads) {
  if (n_draws == 0) throw std::invalid_argument("zero_mass: n_draws must be >= 1");
  const std::size_t p = problem.omega0.rows();
  const WSampler sampler(isserlis_lambda(problem.sigma0));
  const Matrix weights = limit_weights(problem, flavor);
  std::vector<Matrix> us(n_draws);
  parallel_for(n_draws, threads, [&](std::size_t k) {
    auto rng = RngStream{master_seed, k}.engine();
    const Matrix w = sampler.draw(rng);
    auto res = minimize_v_weighted(problem, w, weights);
    if (!res.converged) throw LimitNonConvergence("zero_mass: limit problem did not converge");
    us[k] = std::move(res.u);
  });

  ZeroMassResult out;
  out.draws = n_draws;
  out.mass = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      if (!problem.zero_pattern(i, j)) continue;
      std::size_t hits = 0;
      for (const auto& u : us) hits += std::abs(u(i, j)) <= zero_tol ? 1 : 0;
      out.mass(i, j) = static_cast<double>(hits) / static_cast<double>(n_draws);
    }
  if (keep_samples) out.samples = std::move(us);
  return out;
}

std::string scatter_csv(const std::vector<Matrix>& samples,
                        const std::vector<std::pair<std::size_t, std::size_t>>& entries) {
  std::string out = "draw";
  for (auto [i, j] : entries) out += ",u_" + std::to_string(i + 1) + '_' + std::to_string(j + 1);
  out += '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out += std::to_string(k);
    for (auto [i, j] : entries) out += ',' + format_double(samples[k](i, j));
    out += '\n';
  }
  return out;
}

std::string zero_mass_csv(const LimitProblem& problem, const Matrix& mass) {
  std::string out = "i,j,mass\n";
  const std::size_t p = mass.rows();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (problem.zero_pattern(i, j))
        out += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' + format_double(mass(i, j)) + '\n';
  return out;
}

}  // namespace sglasso
