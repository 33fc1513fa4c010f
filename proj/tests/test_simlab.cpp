#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sglasso/linalg.hpp"
#include "sglasso/simlab.hpp"
#include "test_support.hpp"

using namespace sglasso;
using namespace sglasso::testing;

TEST_CASE("registry models are valid") {
  for (const auto& id : model_ids()) {
    CAPTURE(id);
    const TrueModel m = model_registry(id);
    CHECK(m.id == id);
    CHECK(m.omega0.rows() == m.p);
    CHECK(spd_check(m.omega0).min_eigenvalue > 1e-6);
    for (std::size_t i = 0; i < m.p; ++i)
      for (std::size_t j = 0; j < m.p; ++j) {
        if (i == j) continue;
        CHECK((m.omega0(i, j) != 0.0) == m.graph.has_edge(i, j));
      }
    if (id != "STAR5" && id != "PATH5" && id != "AR1_4_HALF")
      for (std::size_t i = 0; i < m.p; ++i)
        for (std::size_t j = 0; j < m.p; ++j)
          CHECK(m.omega0(i, j) == (i == j ? 1.0 : (m.graph.has_edge(i, j) ? 0.2 : 0.0)));
  }
  CHECK_THROWS_AS(model_registry("NOPE"), std::invalid_argument);
}

TEST_CASE("printed models are reproduced exactly") {
  CHECK(model_registry("STAR5").omega0 == star5());
  CHECK(model_registry("PATH5").omega0 == path5());
  CHECK(model_registry("AR1_4_HALF").omega0 == ar1_4_half());
}

TEST_CASE("core-periphery model layout") {
  const TrueModel m = model_registry("CORE_PERIPHERY10");
  CHECK(m.p == 10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) CHECK(m.graph.has_edge(i, j) == (i < 3));
  CHECK(spd_check(m.omega0).is_pd);
}

TEST_CASE("make_model rejects an indefinite result") {
  GraphModel complete(10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) complete.add_edge(i, j);
  CHECK_THROWS_AS(make_model("K10", complete, "", -0.2), NotPositiveDefinite);
}

TEST_CASE("generate_dataset") {
  const TrueModel star = model_registry("STAR5");
  CHECK(generate_dataset(star, 30, {4, 2}) == generate_dataset(star, 30, {4, 2}));
  CHECK_FALSE(generate_dataset(star, 30, {4, 2}) == generate_dataset(star, 30, {4, 3}));

  const Matrix x = generate_dataset(star, 100000, {1, 0});
  CHECK(x.rows() == 100000);
  CHECK(max_abs_diff(sample_covariance(x), inverse_spd(star5())) <= 0.05);

  const TrueModel iid = make_model("EMPTY4", GraphModel(4), "independent");
  const Matrix s = sample_covariance(generate_dataset(iid, 100000, {1, 1}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(s(i, j)) <= 0.05);
}

TEST_CASE("lambda grids") {
  const auto g = default_lambda_grid();
  REQUIRE(g.size() == 40);
  CHECK(g.front() == doctest::Approx(0.005));
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
  CHECK(g[1] / g[0] == doctest::Approx(g[39] / g[38]));
  CHECK_THROWS(log_grid(0.5, 0.5, 1));
  CHECK_THROWS(log_grid(1.0, 0.5, 3));
  CHECK_THROWS(log_grid(0.0, 0.5, 3));
}

TEST_CASE("cross_validate") {
  const TrueModel m = model_registry("STAR5");
  const Matrix x = generate_dataset(m, 40, {9, 0});

  const auto one = cross_validate(x, PenaltySpec::sglasso(), {0.3});
  CHECK(one.best_lambda == 0.3);

  const auto grid = log_grid(0.01, 1.0, 12);
  const auto r = cross_validate(x, PenaltySpec::glasso(), grid);
  REQUIRE(r.cv_scores.size() == grid.size());
  const auto best = std::min_element(r.cv_scores.begin(), r.cv_scores.end());
  CHECK(r.best_lambda == grid[static_cast<std::size_t>(best - r.cv_scores.begin())]);
  CHECK(r.excluded.empty());

  // Shifting the validation covariance's log det constant does not move the argmin.
  const Matrix s = sample_covariance(x);
  const Matrix o1 = solve(s, 0.1, PenaltySpec::glasso()).omega;
  const Matrix o2 = solve(s, 0.3, PenaltySpec::glasso()).omega;
  const double c = log_det(s);
  CHECK((cv_score(o1, s) + c) - (cv_score(o2, s) + c) ==
        doctest::Approx(cv_score(o1, s) - cv_score(o2, s)));
  CHECK(cv_score(o1, s) == doctest::Approx(-log_det(o1) + trace_product(o1, s)));

  CHECK_THROWS(cross_validate(x, PenaltySpec::glasso(), {}));
  CHECK_THROWS(cross_validate(Matrix(3, 5), PenaltySpec::glasso(), {0.1}));
}

TEST_CASE("cross_validate excludes grid points whose fits fail") {
  const Matrix x = generate_dataset(model_registry("PATH5"), 30, {3, 3});
  SolverConfig cfg;
  cfg.max_iters = 3;
  CHECK_THROWS_AS(cross_validate(x, PenaltySpec::glasso(), {0.1, 0.2}, cfg), CvFailure);
}

TEST_CASE("cross-validated lambda is smaller for sglasso on the star model") {
  const TrueModel m = model_registry("STAR5");
  McOptions o;
  const auto sg = monte_carlo(m, 20, 100, PenaltySpec::sglasso(), default_lambda_grid(), 77, o);
  const auto gl = monte_carlo(m, 20, 100, PenaltySpec::glasso(), default_lambda_grid(), 77, o);
  MESSAGE("mean lambda sglasso " << sg.best_lambda.mean << " glasso " << gl.best_lambda.mean);
  CHECK(sg.best_lambda.mean < gl.best_lambda.mean);
}

TEST_CASE("mean_se") {
  CHECK(mean_se({3.0}).se == 0.0);
  const auto m = mean_se({1, 2, 3, 4});
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("monte_carlo is deterministic and order independent") {
  const TrueModel m = model_registry("PATH5");
  const auto grid = log_grid(0.02, 0.8, 8);
  McOptions o;
  o.threads = 3;
  const auto a = monte_carlo(m, 25, 12, PenaltySpec::sglasso(), grid, 5, o);
  o.threads = 1;
  const auto b = monte_carlo(m, 25, 12, PenaltySpec::sglasso(), grid, 5, o);
  CHECK(mc_csv_row(a) == mc_csv_row(b));
  CHECK(a.kl.se >= 0.0);
  for (const auto& row : a.rows)
    if (row.ok) {
      CHECK(std::isfinite(row.metrics.kl));
      CHECK(std::isfinite(row.metrics.frobenius));
    }

  std::vector<std::uint64_t> streams(12);
  std::iota(streams.begin(), streams.end(), 0);
  std::reverse(streams.begin(), streams.end());
  std::swap(streams[2], streams[7]);
  const auto c = monte_carlo_streams(m, 25, streams, PenaltySpec::sglasso(), grid, 5, o);
  CHECK(std::abs(c.kl.mean - a.kl.mean) <= 1e-12);
  CHECK(std::abs(c.frobenius.mean - a.frobenius.mean) <= 1e-12);
  CHECK(std::abs(c.f1.mean - a.f1.mean) <= 1e-12);
  for (std::size_t k = 0; k < streams.size(); ++k)
    CHECK(c.rows[k].metrics.kl == a.rows[streams[k]].metrics.kl);

  const auto single = monte_carlo(m, 25, 1, PenaltySpec::sglasso(), grid, 5, o);
  CHECK(single.kl.se == 0.0);
  CHECK(single.frobenius.se == 0.0);
  CHECK_THROWS(monte_carlo(m, 25, 0, PenaltySpec::sglasso(), grid, 5, o));
}

TEST_CASE("sweep minimum never exceeds the cross-validated loss") {
  const TrueModel m = model_registry("STAR5");
  const auto grid = log_grid(0.01, 1.0, 10);
  const auto cv = monte_carlo(m, 30, 10, PenaltySpec::sglasso(), grid, 21);
  const auto sw = lambda_sweep_min_losses(m, 30, 10, PenaltySpec::sglasso(), PenaltySpec::glasso(), grid, 21);
  for (std::size_t r = 0; r < 10; ++r) {
    CHECK(sw.a.per_rep_min_kl[r] <= cv.rows[r].metrics.kl + 1e-12);
    CHECK(sw.a.per_rep_min_frobenius[r] <= cv.rows[r].metrics.frobenius + 1e-12);
  }
  CHECK(sw.dominance_kl == dominance_fraction(sw.a.per_rep_min_kl, sw.b.per_rep_min_kl));
}

TEST_CASE("sweep with lambda = 0 on a long sample sits near the sample precision") {
  const TrueModel m = model_registry("PATH5");
  const auto sw = lambda_sweep_min_losses(m, 2000, 3, PenaltySpec::glasso(), PenaltySpec::sglasso(),
                                          {0.0, 0.5}, 4);
  for (std::size_t r = 0; r < 3; ++r) {
    const Matrix x = generate_dataset(m, 2000, {4, r});
    const double mle = kl_loss(inverse_spd(sample_covariance(x)), m.omega0);
    CHECK(sw.a.per_rep_min_kl[r] <= mle + 1e-6);
  }
}

TEST_CASE("sweep ordering on the star model") {
  const TrueModel m = model_registry("STAR5");
  const auto sw = lambda_sweep_min_losses(m, 20, 200, PenaltySpec::sglasso(), PenaltySpec::glasso(),
                                          default_lambda_grid(), 13);
  MESSAGE("min KL sglasso " << sw.a.min_kl.mean << " glasso " << sw.b.min_kl.mean);
  CHECK(sw.a.min_kl.mean < sw.b.min_kl.mean);
}

TEST_CASE("recovery target and extremes") {
  const TrueModel ar = model_registry("AR1_4_HALF");
  CHECK(recovery_target(ar) == std::pair<std::size_t, std::size_t>{0, 2});
  GraphModel complete(3);
  complete.add_edge(0, 1);
  complete.add_edge(0, 2);
  complete.add_edge(1, 2);
  CHECK_THROWS_AS(recovery_target(make_model("K3", complete, "")), std::invalid_argument);

  const auto sg = recovery_probability(ar, 20, {0.0, 50.0}, 20, PenaltySpec::sglasso(), 3);
  CHECK(sg.probability[0] == 0.0);
  CHECK(sg.probability[1] == 1.0);
  const auto gl = recovery_probability(ar, 20, {0.0, 50.0}, 20, PenaltySpec::glasso(), 3);
  CHECK(gl.probability[0] == 0.0);
  CHECK(gl.probability[1] == 1.0);
  CHECK(recovery_csv(sg, gl) == "lambda,prob_sglasso,prob_glasso\n0,0,0\n50,1,1\n");
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}
