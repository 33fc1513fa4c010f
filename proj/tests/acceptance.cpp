// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sglasso/asymlab.hpp"
#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"
#include "sglasso/metrics.hpp"
#include "sglasso/penalty.hpp"
#include "sglasso/pipeline.hpp"
#include "sglasso/simlab.hpp"
#include "sglasso/solver.hpp"
#include "test_support.hpp"

using namespace sglasso;
using namespace sglasso::testing;

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Outcome motivating_norms() {
  const double a = l12_sq_norm(star5()), b = l12_sq_norm(path5());
  const double l11 = 8.0 / std::sqrt(5.0) + 5.0;
  const double e1 = std::abs(l11_norm(star5()) - l11), e2 = std::abs(l11_norm(path5()) - l11);
  const bool ok = std::abs(a - 16.155) <= 0.01 && std::abs(b - 14.955) <= 0.01 && e1 <= 1e-9 && e2 <= 1e-9;
  return {ok, "l12sq star=" + fmt(a, 6) + " path=" + fmt(b, 6) + " l11 err=" + fmt(std::max(e1, e2), 2)};
}

Outcome degree_weighted_identity() {
  Rng rng(kSeed);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t p = 1 + static_cast<std::size_t>(t % 10);
    const Matrix omega0 = random_symmetric(p, rng, 2.0);
    const Matrix omega = random_symmetric(p, rng, 2.0);
    const auto d = weighted_degrees(omega0);
    double lhs = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) lhs += 2.0 * d[j] * std::abs(omega(i, j));
    const double rhs = penalty_value(PenaltySpec::weighted(2.0 * degree_penalty_matrix(omega0)), omega, 1.0);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return {worst <= 1e-12, "max relative gap " + fmt(worst, 3) + " over 1000 matrices"};
}

Outcome prox_oracles() {
  Rng rng(kSeed + 1);
  std::uniform_real_distribution<double> uc(0.0, 2.0);
  double worst_prox = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 5);
    const Matrix vm = random_matrix(1, n, rng, 3.0);
    const std::vector<double> v(vm.values().begin(), vm.values().end());
    const double c = uc(rng);
    worst_prox = std::max(worst_prox, dist2(prox_sq_l1(v, c), numeric_sq_l1_prox(v, c)));
  }
  double worst_stat = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t p = 1 + static_cast<std::size_t>(t % 8);
    const Matrix s = random_spd(p, rng);
    const Matrix a = random_symmetric(p, rng, 2.0);
    const double rho = 0.1 + 0.25 * (t % 12);
    const Matrix x = prox_logdet(a, s, rho);
    Matrix g = s - inverse_spd(x);
    g += rho * (x - a);
    worst_stat = std::max(worst_stat, max_abs(g));
  }
  return {worst_prox <= 1e-6 && worst_stat <= 1e-8,
          "prox_sq_l1 max error " + fmt(worst_prox, 3) + ", prox_logdet residual " + fmt(worst_stat, 3)};
}

Outcome solver_optimality() {
  Rng rng(kSeed + 2);
  double inv_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t p = 3 + static_cast<std::size_t>(t % 3);
    const Matrix s = random_sample_covariance(p, 5 * p, rng);
    inv_err = std::max(inv_err, max_abs_diff(solve(s, 0.0, PenaltySpec::glasso()).omega, inverse_spd(s)));
  }
  double worst_kkt = 0.0;
  std::size_t nonconv = 0;
  const char* names[] = {"L11", "L12Sq", "WeightedL11"};
  std::string per_kind;
  for (int kind = 0; kind < 3; ++kind) {
    double kind_worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t p = t % 2 == 0 ? 3 : 5;
      const Matrix s = random_sample_covariance(p, 4 * p, rng);
      const double lambda = 0.05 + 0.05 * (t % 6);
      PenaltySpec spec = PenaltySpec::glasso();
      if (kind == 1) spec = PenaltySpec::sglasso();
      if (kind == 2) spec = PenaltySpec::weighted(2.0 * degree_penalty_matrix(inverse_spd(random_spd(p, rng))));
      const auto est = solve(s, lambda, spec);
      if (!est.converged) ++nonconv;
      kind_worst = std::max(kind_worst, est.kkt_residual);
    }
    worst_kkt = std::max(worst_kkt, kind_worst);
    per_kind += std::string(kind ? ", " : "") + names[kind] + " " + fmt(kind_worst, 3);
  }
  double worst_ref = 0.0;
  for (int t = 0; t < 12; ++t) {
    const Matrix s = random_sample_covariance(3, 12, rng);
    const double lambda = 0.1 + 0.1 * (t % 3);
    const PenaltySpec spec = t % 2 ? PenaltySpec::sglasso() : PenaltySpec::glasso();
    const double f = solve(s, lambda, spec).objective;
    const double r = reference_solve(s, lambda, spec).objective;
    worst_ref = std::max(worst_ref, std::abs(f - r) / std::max(1.0, std::abs(r)));
  }
  const bool ok = inv_err <= 1e-6 && worst_kkt <= 1e-6 && nonconv == 0 && worst_ref <= 1e-5;
  return {ok, "inverse err " + fmt(inv_err, 3) + "; max KKT (" + per_kind + "); nonconverged " +
                  std::to_string(nonconv) + "; reference gap " + fmt(worst_ref, 3)};
}

Outcome finite_sample_trend() {
  const TrueModel m = model_registry("AR1_4_HALF");
  const std::vector<std::size_t> Ts{50, 200, 1000, 5000};
  std::vector<double> medians;
  for (std::size_t T : Ts) {
    const double lambda = 1.0 / std::sqrt(static_cast<double>(T));
    std::vector<double> gaps(50);
    parallel_for(50, 0, [&](std::size_t r) {
      const Matrix s = sample_covariance(generate_dataset(m, T, RngStream{kSeed, r}));
      const Matrix a = solve(s, lambda, PenaltySpec::sglasso()).omega;
      const Matrix b = solve_weighted_from_truth(s, lambda, m.omega0).omega;
      gaps[r] = std::sqrt(static_cast<double>(T)) * frobenius_norm(a - b);
    });
    std::nth_element(gaps.begin(), gaps.begin() + 25, gaps.end());
    const double hi = gaps[25];
    const double lo = *std::max_element(gaps.begin(), gaps.begin() + 25);
    medians.push_back(0.5 * (lo + hi));
  }
  int inversions = 0;
  for (std::size_t k = 1; k < medians.size(); ++k) inversions += medians[k] >= medians[k - 1] ? 1 : 0;
  std::string d = "medians";
  for (std::size_t k = 0; k < Ts.size(); ++k) d += " T=" + std::to_string(Ts[k]) + ":" + fmt(medians[k]);
  return {inversions <= 1, d + "; inversions " + std::to_string(inversions)};
}

Outcome zero_masses() {
  const Matrix omega0 = model_registry("AR1_4_HALF").omega0;
  const auto lp = LimitProblem::make(omega0, 1.0);
  const auto sg = zero_mass(lp, LimitFlavor::sglasso_limit, 2000, kSeed);
  const auto gl = zero_mass(lp, LimitFlavor::glasso_limit, 2000, kSeed);
  const auto lp0 = LimitProblem::make(omega0, 0.0);
  const double m0 = std::max(max_abs(zero_mass(lp0, LimitFlavor::sglasso_limit, 2000, kSeed).mass),
                             max_abs(zero_mass(lp0, LimitFlavor::glasso_limit, 2000, kSeed).mass));
  const bool ok = std::abs(sg.mass(0, 2) - 0.124) <= 0.03 && std::abs(sg.mass(0, 3) - 0.173) <= 0.03 &&
                  std::abs(gl.mass(0, 2) - 0.039) <= 0.02 && std::abs(gl.mass(0, 3) - 0.19) <= 0.03 && m0 <= 0.01;
  return {ok, "sglasso P13=" + fmt(sg.mass(0, 2)) + " P14=" + fmt(sg.mass(0, 3)) + " (want 0.124, 0.173); glasso P13=" +
                  fmt(gl.mass(0, 2)) + " P14=" + fmt(gl.mass(0, 3)) + " (want 0.039, 0.19); lambda0=0 max mass " + fmt(m0)};
}

Outcome monte_carlo_ordering() {
  const TrueModel m = model_registry("CORE_PERIPHERY10");
  const auto grid = default_lambda_grid();
  const auto sg = monte_carlo(m, 50, 200, PenaltySpec::sglasso(), grid, kSeed);
  const auto gl = monte_carlo(m, 50, 200, PenaltySpec::glasso(), grid, kSeed);
  const auto sw = lambda_sweep_min_losses(m, 50, 200, PenaltySpec::sglasso(), PenaltySpec::glasso(), grid, kSeed);
  const bool ok = sg.kl.mean < gl.kl.mean && sg.frobenius.mean < gl.frobenius.mean &&
                  sg.f1.mean >= gl.f1.mean - 0.02 && sw.dominance_kl >= 0.75;
  return {ok, "KL " + fmt(sg.kl.mean) + " vs " + fmt(gl.kl.mean) + ", Frobenius " + fmt(sg.frobenius.mean) + " vs " +
                  fmt(gl.frobenius.mean) + ", F1 " + fmt(sg.f1.mean) + " vs " + fmt(gl.f1.mean) +
                  ", dominance " + fmt(sw.dominance_kl) + ", nonconverged " +
                  std::to_string(sg.nonconverged_count + gl.nonconverged_count + sw.nonconverged_count)};
}

Outcome recovery_curves() {
  const TrueModel m = model_registry("AR1_4_HALF");
  const auto grid = default_lambda_grid();
  const auto sg = recovery_probability(m, 20, grid, 500, PenaltySpec::sglasso(), kSeed);
  const auto gl = recovery_probability(m, 20, grid, 500, PenaltySpec::glasso(), kSeed);
  std::size_t active = 0, violations = 0;
  double worst = 0.0, worst_lambda = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = sg.probability[k], b = gl.probability[k];
    const bool interior = (a > 0.05 && a < 0.95) || (b > 0.05 && b < 0.95);
    if (!interior) continue;
    ++active;
    if (a < b) {
      ++violations;
      if (b - a > worst) {
        worst = b - a;
        worst_lambda = grid[k];
      }
    }
  }
  std::string d = "target (" + std::to_string(sg.target.first + 1) + "," + std::to_string(sg.target.second + 1) +
                  "), " + std::to_string(violations) + " of " + std::to_string(active) +
                  " interior grid points have sglasso < glasso";
  if (violations) d += ", worst gap " + fmt(worst) + " at lambda " + fmt(worst_lambda);
  d += "; at lambda=1: " + fmt(sg.probability.back()) + " vs " + fmt(gl.probability.back());
  return {violations == 0 && active > 0, d};
}

std::string edge_list(const GraphModel& g) {
  std::string s;
  for (auto [i, j] : g.edges()) s += (s.empty() ? "" : " ") + std::to_string(i + 1) + "-" + std::to_string(j + 1);
  return s.empty() ? "none" : s;
}

Outcome empirical_pipeline() {
  const PanelData panel = load_panel(std::string(SGLASSO_DATA_DIR) + "/grunfeld.csv", PanelFormat::long_csv);
  const Matrix resid = first_stage_ols(panel).residuals;
  const auto grid = default_lambda_grid();
  const RunReport sg = estimate_graph(resid, PenaltySpec::sglasso(), grid);
  const RunReport gl = estimate_graph(resid, PenaltySpec::glasso(), grid);
  EstimateOptions zero;
  zero.fixed_lambda = 0.0;
  const RunReport dense = estimate_graph(resid, PenaltySpec::sglasso(), grid, zero);
  const std::size_t p = panel.firms.size();
  const bool identical = sg.graph == gl.graph;
  const bool complete = dense.graph.edge_count() == p * (p - 1) / 2;
  const bool triangle = sg.graph.has_edge(0, 1) && sg.graph.has_edge(0, 2) && sg.graph.has_edge(1, 2);
  std::size_t pp = 0;
  for (auto [i, j] : sg.graph.edges()) pp += (i >= 3 && j >= 3) ? 1 : 0;
  std::string core;
  for (auto c : sg.core_nodes) core += (core.empty() ? "" : ",") + std::to_string(c + 1);
  return {identical && complete,
          "identical graphs " + std::string(identical ? "yes" : "no") + " (sglasso lambda " + fmt(sg.chosen_lambda) +
              ", " + std::to_string(sg.graph.edge_count()) + " edges; glasso lambda " + fmt(gl.chosen_lambda) + ", " +
              std::to_string(gl.graph.edge_count()) + " edges); lambda=0 complete " + (complete ? "yes" : "no") +
              "; reported only: triangle {1,2,3} " + (triangle ? "yes" : "no") + ", periphery-periphery edges " +
              std::to_string(pp) + ", degree core {" + core + "}; sglasso edges " + edge_list(sg.graph)};
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

std::vector<std::pair<std::string, std::string>> csv_files(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out.emplace_back(e.path().filename().string(), read_text_file(e.path().string()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "sglasso_acceptance_determinism";
  fs::remove_all(base);
  const std::string cli = SGLASSO_CLI;
  const std::vector<std::string> jobs{
      "simulate --model STAR5 --T 30 --reps 8 --seed 99 --grid 0.01:1:12",
      "simulate --model CORE_PERIPHERY10 --T 20 --reps 4 --penalty glasso --seed 5 --grid 0.02:1:8",
      "asymptotic --model AR1_4_HALF --lambda0 1 --draws 100 --flavor both --seed 99",
  };
  std::size_t files = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (const char* threads : {"1", "1", "3"}) {
      const fs::path out = base / (std::to_string(j) + "_" + std::to_string(runs.size()));
      if (run(cli + " " + jobs[j] + " --threads " + threads + " --out " + out.string()) != 0)
        return {false, "command failed: " + jobs[j]};
      runs.push_back(csv_files(out));
    }
    if (runs[0].empty() || runs[0] != runs[1] || runs[0] != runs[2])
      return {false, "outputs differ for: " + jobs[j]};
    files += runs[0].size();
  }
  fs::remove_all(base);
  return {true, std::to_string(files) + " CSV files byte-identical across repeated runs and thread counts"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"motivating-example norms", motivating_norms},
      {"degree-weighted identity", degree_weighted_identity},
      {"prox oracles", prox_oracles},
      {"solver optimality", solver_optimality},
      {"finite-sample equivalence trend", finite_sample_trend},
      {"limit zero masses", zero_masses},
      {"Monte Carlo ordering", monte_carlo_ordering},
      {"recovery curves", recovery_curves},
      {"empirical pipeline", empirical_pipeline},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << k + 1 << " [" << criteria[k].first << "]: " << (o.pass ? "PASS" : "FAIL") << " | "
              << o.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
