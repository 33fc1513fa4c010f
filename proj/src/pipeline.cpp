#include "sglasso/pipeline.hpp"

#include <cmath>

#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"

namespace sglasso {

FirstStageResult first_stage_ols(const PanelData& panel) {
  const std::size_t T = panel.years.size(), p = panel.firms.size();
  if (T < 4 || p < 1) throw PanelError("first_stage_ols: panel too small");
  FirstStageResult out;
  out.betas = Matrix(p, 3);
  out.residuals = Matrix(T, p);
  for (std::size_t j = 0; j < p; ++j) {
    Matrix x(T, 3);
    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) {
      x(t, 0) = 1.0;
      x(t, 1) = panel.value(t, j);
      x(t, 2) = panel.capital(t, j);
      y[t] = panel.invest(t, j);
    }
    // Equilibrate columns so the rank test does not depend on units.
    std::vector<double> scale(3, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t t = 0; t < T; ++t) scale[k] += x(t, k) * x(t, k);
      scale[k] = std::sqrt(scale[k]);
      if (scale[k] == 0.0) throw RankDeficient("first_stage_ols: firm '" + panel.firms[j] + "' has an all-zero regressor");
      for (std::size_t t = 0; t < T; ++t) x(t, k) /= scale[k];
    }
    const Matrix xtx = matmul_tn(x, x);
    const auto l = cholesky(xtx);
    bool ok = l.has_value();
    if (ok)
      for (std::size_t k = 0; k < 3; ++k) ok = ok && (*l)(k, k) > 1e-7;
    if (!ok) throw RankDeficient("first_stage_ols: design for firm '" + panel.firms[j] + "' is rank deficient");

    auto xt_times = [&](const std::vector<double>& v) {
      std::vector<double> r(3, 0.0);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < 3; ++k) r[k] += x(t, k) * v[t];
      return r;
    };
    auto residual = [&](const std::vector<double>& b) {
      std::vector<double> e(y);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < 3; ++k) e[t] -= x(t, k) * b[k];
      return e;
    };
    std::vector<double> b = solve_spd(xtx, xt_times(y));
    // One round of refinement tightens orthogonality.
    const auto db = solve_spd(xtx, xt_times(residual(b)));
    for (std::size_t k = 0; k < 3; ++k) b[k] += db[k];
    const auto e = residual(b);
    for (std::size_t k = 0; k < 3; ++k) out.betas(j, k) = b[k] / scale[k];
    for (std::size_t t = 0; t < T; ++t) out.residuals(t, j) = e[t];
  }
  return out;
}

RunReport estimate_graph(const Matrix& residuals, const PenaltySpec& spec,
                         const std::vector<double>& lambda_grid, const EstimateOptions& opts) {
  const std::size_t T = residuals.rows(), p = residuals.cols();
  if (T < 4) throw std::invalid_argument("estimate_graph: need at least 4 rows");
  Matrix data = demean_columns(residuals);
  if (opts.standardize) {
    for (std::size_t j = 0; j < p; ++j) {
      double ss = 0.0;
      for (std::size_t t = 0; t < T; ++t) ss += data(t, j) * data(t, j);
      const double sd = std::sqrt(ss / static_cast<double>(T));
      if (sd == 0.0) throw std::invalid_argument("estimate_graph: column " + std::to_string(j + 1) + " is constant");
      for (std::size_t t = 0; t < T; ++t) data(t, j) /= sd;
    }
  }

  RunReport r;
  if (opts.fixed_lambda) {
    r.chosen_lambda = *opts.fixed_lambda;
  } else {
    r.cv = cross_validate(data, spec, lambda_grid, opts.solver, opts.cv);
    r.chosen_lambda = r.cv->best_lambda;
  }
  r.estimate = solve(sample_covariance(data), r.chosen_lambda, spec, opts.solver);
  r.graph = support_graph(r.estimate);
  for (std::size_t i = 0; i < p; ++i)
    if (2 * r.graph.degree(i) >= p) r.core_nodes.push_back(i);
  return r;
}

nlohmann::json run_report_to_json(const RunReport& r, const std::vector<std::string>& labels) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [i, j] : r.graph.edges()) edges.push_back({i + 1, j + 1});
  nlohmann::json core = nlohmann::json::array();
  for (auto i : r.core_nodes) core.push_back(i + 1);
  nlohmann::json out{{"lambda", r.chosen_lambda},
                     {"converged", r.estimate.converged},
                     {"iterations", r.estimate.iterations},
                     {"objective", r.estimate.objective},
                     {"kkt_residual", r.estimate.kkt_residual},
                     {"nodes", labels},
                     {"edges", std::move(edges)},
                     {"core_nodes", std::move(core)},
                     {"omega", matrix_to_json(r.estimate.omega)}};
  if (r.cv) {
    nlohmann::json scores = nlohmann::json::array();
    for (double s : r.cv->cv_scores) scores.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json());
    out["cv"] = {{"grid", r.cv->lambda_grid}, {"scores", std::move(scores)}, {"excluded", r.cv->excluded}};
  }
  return out;
}

}  // namespace sglasso
