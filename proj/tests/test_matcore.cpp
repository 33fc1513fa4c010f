#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"
#include "sglasso/random.hpp"
#include "test_support.hpp"

using namespace sglasso;
using sglasso::testing::random_spd;
using sglasso::testing::random_symmetric;

namespace {

Matrix reconstruct(const EigenDecomposition& e) {
  return spectral_map(e, [](double v) { return v; });
}

}  // namespace

TEST_CASE("cholesky factors small SPD matrices") {
  const auto l3 = cholesky(Matrix::identity(3));
  REQUIRE(l3);
  CHECK(*l3 == Matrix::identity(3));

  const Matrix m{{4, 2}, {2, 5}};
  const auto l = cholesky(m);
  REQUIRE(l);
  CHECK((*l)(0, 0) == doctest::Approx(2.0));
  CHECK((*l)(1, 0) == doctest::Approx(1.0));
  CHECK((*l)(1, 1) == doctest::Approx(2.0));
  CHECK((*l)(0, 1) == 0.0);
  CHECK(max_abs_diff(matmul(*l, l->transpose()), m) <= 1e-12);
}

TEST_CASE("cholesky signals an indefinite matrix") {
  CHECK_FALSE(cholesky(Matrix{{1, 2}, {2, 1}}));
  CHECK_THROWS_AS(log_det(Matrix{{1, 2}, {2, 1}}), NotPositiveDefinite);
  CHECK_THROWS_AS(inverse_spd(Matrix{{0, 0}, {0, 1}}), NotPositiveDefinite);
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 10);
    const Matrix m = random_spd(p, rng);
    const auto l = cholesky(m);
    REQUIRE(l);
    CHECK(frobenius_norm(matmul(*l, l->transpose()) - m) <= 1e-12 * frobenius_norm(m));
  }
}

TEST_CASE("sym_eigen on hand-checkable inputs") {
  const auto e2 = sym_eigen(Matrix::identity(2));
  CHECK(e2.values[0] == doctest::Approx(1.0));
  CHECK(e2.values[1] == doctest::Approx(1.0));
  CHECK(max_abs_diff(matmul_tn(e2.vectors, e2.vectors), Matrix::identity(2)) <= 1e-12);

  // det([[2-x,1],[1,2-x]]) = (2-x)^2 - 1 has roots 1 and 3.
  const Matrix m{{2, 1}, {1, 2}};
  const auto e = sym_eigen(m);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(max_abs_diff(reconstruct(e), m) <= 1e-12);

  const double d[] = {5, -3, 0};
  const auto ed = sym_eigen(Matrix::diagonal(d));
  CHECK(ed.values == std::vector<double>{-3, 0, 5});
}

TEST_CASE("sym_eigen contract on random symmetric matrices") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 12);
    const Matrix m = random_symmetric(p, rng, 3.0);
    const auto e = sym_eigen(m);
    CHECK(std::is_sorted(e.values.begin(), e.values.end()));
    CHECK(frobenius_norm(reconstruct(e) - m) <= 1e-10 * std::max(1.0, frobenius_norm(m)));
    CHECK(max_abs_diff(matmul_tn(e.vectors, e.vectors), Matrix::identity(p)) <= 1e-10);
  }
}

TEST_CASE("log_det examples") {
  CHECK(log_det(Matrix::identity(4)) == doctest::Approx(0.0));
  CHECK(log_det(Matrix{{2, 0}, {0, 2}}) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(log_det(2.0 * Matrix::identity(3)) == doctest::Approx(3.0 * std::log(2.0)));
}

TEST_CASE("exp(log_det) equals the eigenvalue product") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 8);
    const Matrix m = random_spd(p, rng);
    const auto e = sym_eigen(m);
    const double prod = std::accumulate(e.values.begin(), e.values.end(), 1.0, std::multiplies<>());
    CHECK(std::abs(std::exp(log_det(m)) - prod) <= 1e-8 * prod);
  }
}

TEST_CASE("inverse_spd inverts") {
  Rng rng(8);
  const Matrix m = random_spd(6, rng);
  CHECK(max_abs_diff(matmul(m, inverse_spd(m)), Matrix::identity(6)) <= 1e-10);
  const auto x = solve_spd(m, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Matrix inv = inverse_spd(m);
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += inv(i, j) * static_cast<double>(j + 1);
    CHECK(x[i] == doctest::Approx(s));
  }
}

TEST_CASE("sample_mvn matches its covariance and is deterministic") {
  const RngStream stream{2024, 0};
  const Matrix x = sample_mvn(Matrix::identity(2), 1000000, stream);
  CHECK(x.rows() == 1000000);
  CHECK(max_abs_diff(sample_covariance(x), Matrix::identity(2)) <= 0.01);

  CHECK(sample_mvn(Matrix::identity(3), 0, stream).rows() == 0);

  const Matrix cov{{2, 0.5}, {0.5, 1}};
  CHECK(sample_mvn(cov, 50, RngStream{7, 3}) == sample_mvn(cov, 50, RngStream{7, 3}));
  CHECK_FALSE(sample_mvn(cov, 50, RngStream{7, 3}) == sample_mvn(cov, 50, RngStream{7, 4}));
  CHECK_THROWS_AS(sample_mvn(Matrix{{1, 2}, {2, 1}}, 5, stream), NotPositiveDefinite);
}

TEST_CASE("sample_covariance examples") {
  CHECK(sample_covariance(Matrix{{1, 2}}) == Matrix{{1, 2}, {2, 4}});
  CHECK(sample_covariance(Matrix(4, 3)) == Matrix(3, 3));
  CHECK(sample_covariance(Matrix{{1, 0}, {-1, 0}}) == Matrix{{1, 0}, {0, 0}});
  CHECK_THROWS(sample_covariance(Matrix(0, 3)));
}

TEST_CASE("sample_covariance is PSD") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 9);
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 13);
    const Matrix s = sample_covariance(sglasso::testing::random_matrix(n, p, rng, 2.0));
    CHECK(is_symmetric(s));
    CHECK(sym_eigen(s).values.front() >= -1e-10);
  }
}

TEST_CASE("demean_columns centres each column") {
  const Matrix c = demean_columns(Matrix{{1, 10}, {3, 20}, {5, 60}});
  CHECK(c(0, 0) == doctest::Approx(-2.0));
  CHECK(c(2, 1) == doctest::Approx(30.0));
}

TEST_CASE("random streams are reproducible and distinct") {
  const RngStream a{99, 1};
  auto e1 = a.engine();
  auto e2 = a.engine();
  CHECK(e1() == e2());
  auto e3 = RngStream{99, 2}.engine();
  auto e4 = RngStream{99, 1}.engine();
  CHECK(e3() != e4());
  CHECK(a.substream(0) == a.substream(0));
  CHECK_FALSE(a.substream(0) == RngStream{99, 2}.substream(0));
}

TEST_CASE("matrix CSV and JSON serialization round-trips exactly") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = sglasso::testing::random_matrix(1 + trial % 5, 1 + trial % 7, rng, 1e3);
    m(0, 0) = 1.0 / 3.0;
    CHECK(matrix_from_csv(matrix_to_csv(m)) == m);
    CHECK(matrix_from_json(nlohmann::json::parse(matrix_to_json(m).dump())) == m);
  }
  CHECK(matrix_to_csv(Matrix{{0.1, -2}}) == "0.10000000000000001,-2\n");
}

TEST_CASE("matrix CSV parse errors carry a location") {
  try {
    matrix_from_csv("1,2\n3,x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(matrix_from_csv("1,2\n3\n"), ParseError);
}
