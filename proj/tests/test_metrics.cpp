#include <doctest.h>

#include <cmath>

#include "sglasso/linalg.hpp"
#include "sglasso/metrics.hpp"
#include "sglasso/solver.hpp"
#include "test_support.hpp"

using namespace sglasso;
using namespace sglasso::testing;

namespace {

// Sum of mu - log mu - 1 over eigenvalues of L^T omega_hat L, L L^T = sigma0.
double kl_by_eigenvalues(const Matrix& omega_hat, const Matrix& omega0) {
  const Matrix l = *cholesky(inverse_spd(omega0));
  const auto eig = sym_eigen(symmetrize(matmul(matmul_tn(l, omega_hat), l)));
  double kl = 0.0;
  for (double mu : eig.values) kl += mu - std::log(mu) - 1.0;
  return kl;
}

}  // namespace

TEST_CASE("kl_loss on small closed forms") {
  const Matrix i2 = Matrix::identity(2);
  CHECK(kl_loss(i2, i2) == doctest::Approx(0.0));
  CHECK(kl_loss(2.0 * i2, i2) == doctest::Approx(-2.0 * std::log(2.0) + 2.0).epsilon(1e-12));
  CHECK(kl_loss(2.0 * i2, i2) == doctest::Approx(0.6137).epsilon(1e-4));
  CHECK_THROWS_AS(kl_loss(Matrix{{1, 2}, {2, 1}}, i2), NotPositiveDefinite);
}

TEST_CASE("kl_loss agrees with the eigenvalue route and is nonnegative") {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t p = 1 + static_cast<std::size_t>(t % 8);
    const Matrix a = random_spd(p, rng);
    const Matrix b = random_spd(p, rng);
    const double kl = kl_loss(a, b);
    CHECK(kl >= -1e-12);
    CHECK(std::abs(kl - kl_by_eigenvalues(a, b)) <= 1e-10 * std::max(1.0, kl));
    CHECK(std::abs(kl_loss(a, a)) <= 1e-10);
  }
}

TEST_CASE("frobenius_loss") {
  CHECK(frobenius_loss(Matrix::identity(3), Matrix::identity(3)) == 0.0);
  CHECK(frobenius_loss(Matrix::identity(2), Matrix(2, 2)) == doctest::Approx(std::sqrt(2.0)));
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = random_symmetric(4, rng), b = random_symmetric(4, rng), c = random_symmetric(4, rng);
    CHECK(frobenius_loss(a, c) <= frobenius_loss(a, b) + frobenius_loss(b, c) + 1e-12);
  }
}

TEST_CASE("GraphModel validation and edges") {
  BoolMatrix bad(3);
  bad.set(0, 1, true);
  CHECK_THROWS_AS(GraphModel{bad}, std::invalid_argument);
  BoolMatrix loop(3);
  loop.set(1, 1, true);
  CHECK_THROWS_AS(GraphModel{loop}, std::invalid_argument);

  const auto g = GraphModel::from_edges(4, {{2, 0}, {1, 3}});
  CHECK(g.has_edge(0, 2));
  CHECK(g.has_edge(2, 0));
  CHECK(g.edge_count() == 2);
  CHECK(g.degree(0) == 1);
  const std::vector<std::pair<std::size_t, std::size_t>> expect{{0, 2}, {1, 3}};
  CHECK(g.edges() == expect);
}

TEST_CASE("support_graph of the motivating matrices") {
  PrecisionEstimate est;
  est.support = BoolMatrix(5);
  for (std::size_t i = 0; i < 5; ++i) est.support.set(i, i, true);
  CHECK(support_graph(est).edge_count() == 0);

  auto from_matrix = [](const Matrix& m) {
    BoolMatrix s(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) s.set(i, j, m(i, j) != 0.0);
    return support_graph(s);
  };
  CHECK(from_matrix(star5()) == GraphModel::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}));
  CHECK(from_matrix(path5()) == GraphModel::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}));
}

TEST_CASE("confusion counts") {
  const auto truth = GraphModel::from_edges(5, {{0, 1}, {1, 2}, {3, 4}});
  CHECK(confusion(truth, truth) == ConfusionCounts{3, 0, 0, 7});
  const auto c_empty = confusion(GraphModel(5), truth);
  CHECK(c_empty.fn == 3);
  CHECK(c_empty.tp == 0);
  GraphModel complete(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) complete.add_edge(i, j);
  const auto c_full = confusion(complete, truth);
  CHECK(c_full.fp == 7);
  CHECK(c_full.tp + c_full.fp + c_full.fn + c_full.tn == 10);
  CHECK_THROWS(confusion(GraphModel(4), truth));
}

TEST_CASE("f1_score") {
  CHECK(f1_score({2, 1, 1, 0}) == doctest::Approx(4.0 / 6.0));
  CHECK(f1_score({3, 0, 0, 7}) == 1.0);
  CHECK(f1_score({0, 2, 1, 7}) == 0.0);
  CHECK(f1_score({0, 0, 0, 10}) == 1.0);
  // fp and fn enter symmetrically in the formula, but swapping them changes
  // the confusion table; only the fp == fn case is a fixed point.
  const ConfusionCounts a{2, 3, 1, 4}, b{2, 1, 3, 4};
  CHECK(f1_score(a) == doctest::Approx(f1_score(b)));
  CHECK_FALSE(a == b);
  Rng rng(5);
  std::uniform_int_distribution<int> d(0, 6);
  for (int t = 0; t < 200; ++t) {
    const ConfusionCounts c{std::size_t(d(rng)), std::size_t(d(rng)), std::size_t(d(rng)), 0};
    const double f = f1_score(c);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("dominance_fraction") {
  const std::vector<double> a{1, 2, 3};
  CHECK(dominance_fraction(a, a) == 0.0);
  CHECK(dominance_fraction({0, 1, 2}, a) == 1.0);
  CHECK(dominance_fraction({1, 3}, {2, 2}) == 0.5);
  CHECK_THROWS(dominance_fraction({1}, {1, 2}));
}

TEST_CASE("unpenalized fit on generic data has a complete graph") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Matrix s = random_sample_covariance(6, 40, rng);
    const auto est = solve(s, 0.0, PenaltySpec::glasso());
    CHECK(support_graph(est).edge_count() == 15);
  }
}

TEST_CASE("MetricsReport serialization") {
  MetricsReport r;
  r.lambda_used = 0.5;
  r.kl = 0.25;
  r.frobenius = 1.0;
  r.confusion = {1, 2, 3, 4};
  r.f1 = 0.25;
  CHECK(metrics_csv_header() == "lambda,kl,frobenius,tp,fp,fn,tn,f1");
  CHECK(metrics_csv_row(r) == "0.5,0.25,1,1,2,3,4,0.25");
  const auto j = metrics_to_json(r);
  CHECK(j["tn"] == 4);
  CHECK(j["kl"] == 0.25);
}
