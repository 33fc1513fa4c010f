#include "sglasso/simlab.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"

namespace sglasso {

namespace {

// 1-based edge lists keep the registry readable.
GraphModel graph1(std::size_t p, std::initializer_list<std::pair<int, int>> edges) {
  GraphModel g(p);
  for (auto [i, j] : edges) g.add_edge(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
  return g;
}

GraphModel path_graph(std::size_t p) {
  GraphModel g(p);
  for (std::size_t i = 0; i + 1 < p; ++i) g.add_edge(i, i + 1);
  return g;
}

GraphModel cycle_graph(std::size_t p) {
  GraphModel g = path_graph(p);
  g.add_edge(p - 1, 0);
  return g;
}

GraphModel star_graph(std::size_t p) {
  GraphModel g(p);
  for (std::size_t i = 1; i < p; ++i) g.add_edge(0, i);
  return g;
}

Matrix star5_precision() {
  const double a = 1.0 / std::sqrt(5.0);
  return {{1, a, a, a, a}, {a, 1, 0, 0, 0}, {a, 0, 1, 0, 0}, {a, 0, 0, 1, 0}, {a, 0, 0, 0, 1}};
}

Matrix path5_precision() {
  const double a = 1.0 / std::sqrt(5.0);
  return {{1, a, 0, 0, 0}, {a, 1, a, 0, 0}, {0, a, 1, a, 0}, {0, 0, a, 1, a}, {0, 0, 0, a, 1}};
}

Matrix ar1_4_half_precision() {
  return {{1, .5, 0, 0}, {.5, 1, .5, 0}, {0, .5, 1, .5}, {0, 0, .5, 1}};
}

GraphModel core_periphery10() {
  GraphModel g(10);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  for (std::size_t k = 3; k < 10; ++k)
    for (std::size_t c = 0; c < 3; ++c) g.add_edge(c, k);
  return g;
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || !std::isfinite(grid[k]))
      throw std::invalid_argument("lambda grid values must be finite and >= 0");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw std::invalid_argument("lambda grid must be strictly increasing");
  }
}

Matrix rows_of(const Matrix& data, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), data.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = data.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// A fit that either converged or is reported as missing.
std::optional<PrecisionEstimate> try_solve(const Matrix& s, double lambda, const PenaltySpec& spec,
                                           const SolverConfig& cfg) {
  try {
    auto est = solve(s, lambda, spec, cfg);
    if (!est.converged) return std::nullopt;
    return est;
  } catch (const InfeasibleProblem&) {
    return std::nullopt;
  } catch (const NotPositiveDefinite&) {
    return std::nullopt;
  }
}

unsigned resolve_threads(unsigned t) {
  if (t != 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

TrueModel make_model(std::string id, const GraphModel& graph, std::string description,
                     double edge_value) {
  const std::size_t p = graph.p();
  Matrix omega0 = Matrix::identity(p);
  for (auto [i, j] : graph.edges()) {
    omega0(i, j) = edge_value;
    omega0(j, i) = edge_value;
  }
  if (!spd_check(omega0).is_pd)
    throw NotPositiveDefinite("model " + id + ": precision matrix is not positive definite");
  return {std::move(id), p, graph, std::move(omega0), std::move(description)};
}

TrueModel make_model_from_precision(std::string id, const Matrix& omega0, std::string description) {
  require_square(omega0, "make_model_from_precision");
  if (!is_symmetric(omega0)) throw std::invalid_argument("model " + id + ": precision not symmetric");
  if (!spd_check(omega0).is_pd)
    throw NotPositiveDefinite("model " + id + ": precision matrix is not positive definite");
  const std::size_t p = omega0.rows();
  GraphModel g(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (omega0(i, j) != 0.0) g.add_edge(i, j);
  return {std::move(id), p, std::move(g), omega0, std::move(description)};
}

std::vector<std::string> model_ids() {
  return {"STAR5", "PATH5", "AR1_4_HALF", "CYCLE5", "P5_A",  "P5_B",  "P5_C",
          "P5_D",  "P5_E",  "P10_A",      "P10_B",  "P10_C", "P10_D", "P10_E",
          "CORE_PERIPHERY10"};
}

TrueModel model_registry(const std::string& id) {
  if (id == "STAR5") return make_model_from_precision(id, star5_precision(), "star on 5 nodes, hub 1, entries 1/sqrt(5)");
  if (id == "PATH5") return make_model_from_precision(id, path5_precision(), "path 1-2-3-4-5, entries 1/sqrt(5)");
  if (id == "AR1_4_HALF") return make_model_from_precision(id, ar1_4_half_precision(), "tridiagonal 0.5 on 4 nodes");
  if (id == "CYCLE5") return make_model(id, cycle_graph(5), "5-cycle");
  if (id == "P5_A")
    return make_model(id, graph1(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}, {1, 3}, {3, 5}}),
                      "5-cycle with chords 1-3 and 3-5");
  if (id == "P5_B") return make_model(id, star_graph(5), "star on 5 nodes, hub 1");
  if (id == "P5_C") return make_model(id, path_graph(5), "path on 5 nodes");
  if (id == "P5_D")
    return make_model(id, graph1(5, {{1, 2}, {2, 3}, {1, 3}, {3, 4}, {4, 5}}), "triangle 1-2-3 with tail 3-4-5");
  if (id == "P5_E")
    return make_model(id, graph1(5, {{1, 2}, {1, 3}, {2, 3}, {1, 4}, {1, 5}, {4, 5}}), "bowtie centred on 1");
  if (id == "P10_A") return make_model(id, path_graph(10), "path on 10 nodes");
  if (id == "P10_B") return make_model(id, star_graph(10), "star on 10 nodes, hub 1");
  if (id == "P10_C") return make_model(id, cycle_graph(10), "10-cycle");
  if (id == "P10_D")
    return make_model(id,
                      graph1(10, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {6, 7}, {6, 8}, {6, 9}, {6, 10}, {1, 6}}),
                      "two linked stars, hubs 1 and 6");
  if (id == "P10_E")
    return make_model(id,
                      graph1(10, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {6, 7}, {7, 8}, {8, 9}, {9, 10},
                                  {1, 6}, {2, 7}, {3, 8}, {4, 9}, {5, 10}}),
                      "2 x 5 ladder");
  if (id == "CORE_PERIPHERY10")
    return make_model(id, core_periphery10(), "core {1,2,3} mutually linked, 4..10 each linked to all core nodes");
  throw std::invalid_argument("unknown model id: " + id);
}

Matrix generate_dataset(const TrueModel& model, std::size_t T, const RngStream& stream) {
  if (T < 2) throw std::invalid_argument("generate_dataset: T must be >= 2");
  return sample_mvn(inverse_spd(model.omega0), T, stream);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_lambda_grid() { return log_grid(0.005, 1.0, 40); }

double cv_score(const Matrix& omega, const Matrix& sigma_val) {
  return -log_det(omega) + trace_product(omega, sigma_val);
}

CvResult cross_validate(const Matrix& data, const PenaltySpec& spec,
                        const std::vector<double>& lambda_grid, const SolverConfig& cfg,
                        const CvOptions& opts) {
  const std::size_t T = data.rows();
  if (T < 4) throw std::invalid_argument("cross_validate: need at least 4 rows");
  validate_grid(lambda_grid);
  spec.validate(data.cols());

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (opts.shuffle) {
    auto rng = RngStream{opts.shuffle_seed, 0}.engine();
    std::shuffle(order.begin(), order.end(), rng);
  }
  const std::size_t half = T / 2;
  const std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  const Matrix s_a = sample_covariance(rows_of(data, a));
  const Matrix s_b = sample_covariance(rows_of(data, b));
  const std::pair<const Matrix*, const Matrix*> folds[] = {{&s_a, &s_b}, {&s_b, &s_a}};

  CvResult out;
  out.lambda_grid = lambda_grid;
  out.cv_scores.assign(lambda_grid.size(), std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    double total = 0.0;
    bool ok = true;
    for (auto [train, val] : folds) {
      const auto est = try_solve(*train, lambda_grid[k], spec, cfg);
      if (!est) {
        ok = false;
        break;
      }
      total += cv_score(est->omega, *val);
    }
    if (!ok) {
      out.excluded.push_back(lambda_grid[k]);
      continue;
    }
    out.cv_scores[k] = total / 2.0;
    if (out.cv_scores[k] < best) {
      best = out.cv_scores[k];
      out.best_lambda = lambda_grid[k];
      any = true;
    }
  }
  if (!any) throw CvFailure("cross_validate: no lambda on the grid could be fitted");
  return out;
}

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  const std::size_t n = xs.size();
  if (n == 0) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.se = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.mean = pairwise_sum(xs.data(), n) / static_cast<double>(n);
  if (n == 1) return r;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - r.mean) * (xs[i] - r.mean);
  const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
  r.se = std::sqrt(var / static_cast<double>(n));
  return r;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned t = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

McSummary monte_carlo_streams(const TrueModel& model, std::size_t T,
                              const std::vector<std::uint64_t>& streams, const PenaltySpec& spec,
                              const std::vector<double>& lambda_grid, std::uint64_t master_seed,
                              const McOptions& opts) {
  if (streams.empty()) throw std::invalid_argument("monte_carlo: reps must be >= 1");
  validate_grid(lambda_grid);
  spec.validate(model.p);
  opts.solver.validate();

  std::vector<McRow> rows(streams.size());
  parallel_for(streams.size(), opts.threads, [&](std::size_t r) {
    McRow& row = rows[r];
    row.stream = streams[r];
    const Matrix data = generate_dataset(model, T, RngStream{master_seed, streams[r]});
    double lambda = 0.0;
    try {
      lambda = cross_validate(data, spec, lambda_grid, opts.solver, opts.cv).best_lambda;
    } catch (const CvFailure&) {
      return;
    }
    const auto est = try_solve(sample_covariance(data), lambda, spec, opts.solver);
    if (!est) return;
    row.metrics = evaluate(*est, model.omega0, model.graph, lambda);
    row.ok = std::isfinite(row.metrics.kl) && std::isfinite(row.metrics.frobenius);
  });

  McSummary s;
  s.model_id = model.id;
  s.estimator = spec.name();
  s.T = T;
  s.reps = streams.size();
  std::vector<double> lam, kl, fr, f1;
  for (const auto& row : rows) {
    if (!row.ok) {
      ++s.nonconverged_count;
      continue;
    }
    lam.push_back(row.metrics.lambda_used);
    kl.push_back(row.metrics.kl);
    fr.push_back(row.metrics.frobenius);
    f1.push_back(row.metrics.f1);
  }
  s.best_lambda = mean_se(lam);
  s.kl = mean_se(kl);
  s.frobenius = mean_se(fr);
  s.f1 = mean_se(f1);
  s.rows = std::move(rows);
  return s;
}

McSummary monte_carlo(const TrueModel& model, std::size_t T, std::size_t reps,
                      const PenaltySpec& spec, const std::vector<double>& lambda_grid,
                      std::uint64_t master_seed, const McOptions& opts) {
  std::vector<std::uint64_t> streams(reps);
  std::iota(streams.begin(), streams.end(), std::uint64_t{0});
  return monte_carlo_streams(model, T, streams, spec, lambda_grid, master_seed, opts);
}

SweepResult lambda_sweep_min_losses(const TrueModel& model, std::size_t T, std::size_t reps,
                                    const PenaltySpec& a, const PenaltySpec& b,
                                    const std::vector<double>& lambda_grid,
                                    std::uint64_t master_seed, const McOptions& opts) {
  if (reps == 0) throw std::invalid_argument("lambda_sweep: reps must be >= 1");
  validate_grid(lambda_grid);
  a.validate(model.p);
  b.validate(model.p);
  opts.solver.validate();

  struct Best {
    double kl = std::numeric_limits<double>::infinity();
    double frob = std::numeric_limits<double>::infinity();
    double kl_lambda = 0.0;
  };
  std::vector<std::array<Best, 2>> best(reps);
  std::vector<char> ok(reps, 0);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const Matrix s = sample_covariance(generate_dataset(model, T, RngStream{master_seed, r}));
    const PenaltySpec* specs[] = {&a, &b};
    for (int side = 0; side < 2; ++side) {
      Best& bs = best[r][side];
      for (double lambda : lambda_grid) {
        const auto est = try_solve(s, lambda, *specs[side], opts.solver);
        if (!est) continue;
        const double kl = kl_loss(est->omega, model.omega0);
        const double fr = frobenius_loss(est->omega, model.omega0);
        if (kl < bs.kl) {
          bs.kl = kl;
          bs.kl_lambda = lambda;
        }
        bs.frob = std::min(bs.frob, fr);
      }
    }
    ok[r] = std::isfinite(best[r][0].kl) && std::isfinite(best[r][1].kl);
  });

  SweepResult out;
  out.model_id = model.id;
  out.T = T;
  out.reps = reps;
  out.a.estimator = a.name();
  out.b.estimator = b.name();
  std::vector<double> lam_a, lam_b;
  for (std::size_t r = 0; r < reps; ++r) {
    if (!ok[r]) {
      ++out.nonconverged_count;
      continue;
    }
    out.a.per_rep_min_kl.push_back(best[r][0].kl);
    out.a.per_rep_min_frobenius.push_back(best[r][0].frob);
    out.b.per_rep_min_kl.push_back(best[r][1].kl);
    out.b.per_rep_min_frobenius.push_back(best[r][1].frob);
    lam_a.push_back(best[r][0].kl_lambda);
    lam_b.push_back(best[r][1].kl_lambda);
  }
  for (auto* side : {&out.a, &out.b}) {
    side->min_kl = mean_se(side->per_rep_min_kl);
    side->min_frobenius = mean_se(side->per_rep_min_frobenius);
  }
  out.a.argmin_kl_lambda = mean_se(lam_a);
  out.b.argmin_kl_lambda = mean_se(lam_b);
  out.dominance_kl = dominance_fraction(out.a.per_rep_min_kl, out.b.per_rep_min_kl);
  return out;
}

std::pair<std::size_t, std::size_t> recovery_target(const TrueModel& model) {
  const auto d = weighted_degrees(model.omega0);
  const std::size_t p = model.p;
  double best = -1.0;
  std::pair<std::size_t, std::size_t> target{0, 0};
  bool found = false;
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < p; ++i) {
      if (i == j || model.graph.has_edge(i, j)) continue;
      const double v = d[i] + d[j];
      if (v > best) {
        best = v;
        target = {std::min(i, j), std::max(i, j)};
        found = true;
      }
    }
  if (!found) throw std::invalid_argument("recovery_target: model " + model.id + " has no non-edge");
  return target;
}

RecoveryCurve recovery_probability(const TrueModel& model, std::size_t T,
                                   const std::vector<double>& lambda_grid, std::size_t reps,
                                   const PenaltySpec& spec, std::uint64_t master_seed,
                                   const McOptions& opts) {
  if (reps == 0) throw std::invalid_argument("recovery_probability: reps must be >= 1");
  validate_grid(lambda_grid);
  spec.validate(model.p);
  opts.solver.validate();
  RecoveryCurve out;
  out.target = recovery_target(model);
  out.lambda_grid = lambda_grid;
  const auto [ti, tj] = out.target;
  const std::size_t g = lambda_grid.size();

  // hits[r * g + k]: 1 recovered, 0 not, -1 fit failed.
  std::vector<signed char> hits(reps * g, 0);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const Matrix s = sample_covariance(generate_dataset(model, T, RngStream{master_seed, r}));
    for (std::size_t k = 0; k < g; ++k) {
      const auto est = try_solve(s, lambda_grid[k], spec, opts.solver);
      hits[r * g + k] = !est ? -1 : (est->support(ti, tj) ? 0 : 1);
    }
  });
  out.probability.assign(g, 0.0);
  for (std::size_t k = 0; k < g; ++k) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto h = hits[r * g + k];
      if (h < 0) ++out.nonconverged_count;
      count += h == 1 ? 1 : 0;
    }
    out.probability[k] = static_cast<double>(count) / static_cast<double>(reps);
  }
  return out;
}

std::string mc_csv_header() {
  return "model,estimator,T,reps,lambda_mean,lambda_se,kl_mean,kl_se,frobenius_mean,frobenius_se,"
         "f1_mean,f1_se,nonconverged";
}

std::string mc_csv_row(const McSummary& s) {
  std::string out = s.model_id + ',' + s.estimator + ',' + std::to_string(s.T) + ',' +
                    std::to_string(s.reps);
  for (const MeanSe* m : {&s.best_lambda, &s.kl, &s.frobenius, &s.f1})
    out += ',' + format_double(m->mean) + ',' + format_double(m->se);
  return out + ',' + std::to_string(s.nonconverged_count);
}

namespace {
nlohmann::json mean_se_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }
}  // namespace

nlohmann::json mc_to_json(const McSummary& s) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& row : s.rows) {
    nlohmann::json r = row.ok ? metrics_to_json(row.metrics) : nlohmann::json::object();
    r["stream"] = row.stream;
    r["ok"] = row.ok;
    reps.push_back(std::move(r));
  }
  return {{"model", s.model_id},
          {"estimator", s.estimator},
          {"T", s.T},
          {"reps", s.reps},
          {"best_lambda", mean_se_json(s.best_lambda)},
          {"kl", mean_se_json(s.kl)},
          {"frobenius", mean_se_json(s.frobenius)},
          {"f1", mean_se_json(s.f1)},
          {"nonconverged", s.nonconverged_count},
          {"replications", std::move(reps)}};
}

std::string sweep_csv_header() {
  return "model,T,reps,estimator_a,estimator_b,min_kl_a,min_kl_a_se,min_kl_b,min_kl_b_se,"
         "min_frobenius_a,min_frobenius_a_se,min_frobenius_b,min_frobenius_b_se,dominance_kl,"
         "nonconverged";
}

std::string sweep_csv_row(const SweepResult& s) {
  std::string out = s.model_id + ',' + std::to_string(s.T) + ',' + std::to_string(s.reps) + ',' +
                    s.a.estimator + ',' + s.b.estimator;
  for (const MeanSe* m : {&s.a.min_kl, &s.b.min_kl, &s.a.min_frobenius, &s.b.min_frobenius})
    out += ',' + format_double(m->mean) + ',' + format_double(m->se);
  return out + ',' + format_double(s.dominance_kl) + ',' + std::to_string(s.nonconverged_count);
}

nlohmann::json sweep_to_json(const SweepResult& s) {
  auto side = [](const SweepSide& x) {
    return nlohmann::json{{"estimator", x.estimator},
                          {"min_kl", mean_se_json(x.min_kl)},
                          {"min_frobenius", mean_se_json(x.min_frobenius)},
                          {"argmin_kl_lambda", mean_se_json(x.argmin_kl_lambda)}};
  };
  return {{"model", s.model_id}, {"T", s.T},
          {"reps", s.reps},      {"a", side(s.a)},
          {"b", side(s.b)},      {"dominance_kl", s.dominance_kl},
          {"nonconverged", s.nonconverged_count}};
}

std::string recovery_csv(const RecoveryCurve& sglasso, const RecoveryCurve& glasso) {
  if (sglasso.lambda_grid != glasso.lambda_grid)
    throw std::invalid_argument("recovery_csv: curves use different grids");
  std::string out = "lambda,prob_sglasso,prob_glasso\n";
  for (std::size_t k = 0; k < sglasso.lambda_grid.size(); ++k)
    out += format_double(sglasso.lambda_grid[k]) + ',' + format_double(sglasso.probability[k]) +
           ',' + format_double(glasso.probability[k]) + '\n';
  return out;
}

}  // namespace sglasso
