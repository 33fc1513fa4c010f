#include "sglasso/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sglasso {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Column absolute sums, optionally skipping the diagonal entry.
std::vector<double> column_abs_sums(const Matrix& m, bool include_diagonal) {
  std::vector<double> c(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (include_diagonal || i != j) c[j] += std::abs(m(i, j));
  return c;
}

double soft(double v, double t) {
  const double a = std::abs(v) - t;
  return a > 0.0 ? std::copysign(a, v) : 0.0;
}

}  // namespace

PenaltySpec PenaltySpec::glasso(bool penalize_diagonal) {
  return {penalty_kind::L11{}, penalize_diagonal};
}

PenaltySpec PenaltySpec::sglasso(bool penalize_diagonal) {
  return {penalty_kind::L12Sq{}, penalize_diagonal};
}

PenaltySpec PenaltySpec::weighted(Matrix weights, bool penalize_diagonal) {
  return {penalty_kind::WeightedL11{std::move(weights)}, penalize_diagonal};
}

PenaltySpec PenaltySpec::combined(double lambda1, double lambda2, bool penalize_diagonal) {
  return {penalty_kind::Combined{lambda1, lambda2}, penalize_diagonal};
}

void PenaltySpec::validate(std::size_t p) const {
  std::visit(overloaded{
                 [](const penalty_kind::L11&) {},
                 [](const penalty_kind::L12Sq&) {},
                 [p](const penalty_kind::WeightedL11& w) {
                   if (w.weights.rows() != p || w.weights.cols() != p)
                     throw std::invalid_argument("weighted penalty: weight matrix is not p x p");
                   if (!is_symmetric(w.weights))
                     throw std::invalid_argument("weighted penalty: weights must be symmetric");
                   for (double v : w.weights.values())
                     if (!(v >= 0.0))
                       throw std::invalid_argument("weighted penalty: weights must be >= 0");
                 },
                 [](const penalty_kind::Combined& c) {
                   if (!(c.lambda1 >= 0.0) || !(c.lambda2 >= 0.0))
                     throw std::invalid_argument("combined penalty: coefficients must be >= 0");
                   if (c.lambda1 == 0.0 && c.lambda2 == 0.0)
                     throw std::invalid_argument("combined penalty: one coefficient must be > 0");
                 },
             },
             kind);
}

std::string PenaltySpec::name() const {
  std::string base = std::visit(overloaded{
                                    [](const penalty_kind::L11&) { return std::string("glasso"); },
                                    [](const penalty_kind::L12Sq&) { return std::string("sglasso"); },
                                    [](const penalty_kind::WeightedL11&) {
                                      return std::string("weighted");
                                    },
                                    [](const penalty_kind::Combined&) {
                                      return std::string("combined");
                                    },
                                },
                                kind);
  return penalize_diagonal ? base : base + "-offdiag";
}

double l11_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += std::abs(v);
  return s;
}

double l12_sq_norm(const Matrix& m) {
  double s = 0.0;
  for (double c : column_abs_sums(m, true)) s += c * c;
  return s;
}

DegreeVector weighted_degrees(const Matrix& m) {
  DegreeVector d(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double v : m.row(i)) d[i] += std::abs(v);
  return d;
}

Matrix degree_penalty_matrix(const Matrix& omega0) {
  require_square(omega0, "degree_penalty_matrix");
  const auto d = weighted_degrees(omega0);
  const std::size_t p = d.size();
  Matrix w(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) w(i, j) = 0.5 * (d[i] + d[j]);
  return w;
}

double penalty_value(const PenaltySpec& spec, const Matrix& m, double lambda) {
  require_square(m, "penalty_value");
  const bool diag = spec.penalize_diagonal;
  auto l11 = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (diag || i != j) s += std::abs(m(i, j));
    return s;
  };
  auto l12sq = [&] {
    double s = 0.0;
    for (double c : column_abs_sums(m, diag)) s += c * c;
    return s;
  };
  const double raw = std::visit(
      overloaded{
          [&](const penalty_kind::L11&) { return l11(); },
          [&](const penalty_kind::L12Sq&) { return l12sq(); },
          [&](const penalty_kind::WeightedL11& w) {
            require_same_shape(w.weights, m, "penalty_value");
            double s = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i)
              for (std::size_t j = 0; j < m.cols(); ++j)
                if (diag || i != j) s += w.weights(i, j) * std::abs(m(i, j));
            return s;
          },
          [&](const penalty_kind::Combined& c) { return c.lambda1 * l11() + c.lambda2 * l12sq(); },
      },
      spec.kind);
  return lambda * raw;
}

std::vector<double> prox_soft_threshold(std::span<const double> v, double t,
                                        std::span<const double> weights) {
  if (weights.size() != v.size())
    throw std::invalid_argument("prox_soft_threshold: weights length differs from v");
  if (!(t >= 0.0)) throw std::invalid_argument("prox_soft_threshold: t must be >= 0");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = soft(v[i], t * weights[i]);
  return out;
}

std::vector<double> prox_sq_l1(std::span<const double> v, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("prox_sq_l1: c must be >= 0");
  std::vector<double> out(v.begin(), v.end());
  if (c == 0.0 || v.empty()) return out;

  // The minimizer soft-thresholds v at tau = 2c * sum_{i in S} (|v_i| - tau)
  // over its support S, which is a prefix of |v| sorted descending.
  std::vector<double> mag(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

  double tau = 0.0;
  double cum = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    cum += mag[order[k - 1]];
    const double candidate = 2.0 * c * cum / (1.0 + 2.0 * c * static_cast<double>(k));
    if (mag[order[k - 1]] > candidate) tau = candidate;
    else break;
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = soft(v[i], tau);
  return out;
}

Matrix prox_penalty(const Matrix& v, const PenaltySpec& spec, double lambda, double scale) {
  require_square(v, "prox_penalty");
  const std::size_t p = v.rows();
  const double t = lambda * scale;
  const bool diag = spec.penalize_diagonal;
  Matrix out = v;

  auto entrywise = [&](auto&& weight_of) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (diag || i != j) out(i, j) = soft(v(i, j), t * weight_of(i, j));
  };

  // Column-wise prox of a * sum|x| + b * (sum|x|)^2 over the penalized
  // entries of each column; soft-thresholding by a first and then applying
  // the squared-L1 prox gives the exact joint prox.
  auto columnwise = [&](double a, double b) {
    std::vector<double> col;
    col.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
      col.clear();
      for (std::size_t i = 0; i < p; ++i)
        if (diag || i != j) col.push_back(a > 0.0 ? soft(v(i, j), a) : v(i, j));
      const auto x = prox_sq_l1(col, b);
      std::size_t k = 0;
      for (std::size_t i = 0; i < p; ++i)
        if (diag || i != j) out(i, j) = x[k++];
    }
  };

  std::visit(overloaded{
                 [&](const penalty_kind::L11&) { entrywise([](std::size_t, std::size_t) { return 1.0; }); },
                 [&](const penalty_kind::L12Sq&) { columnwise(0.0, t); },
                 [&](const penalty_kind::WeightedL11& w) {
                   entrywise([&](std::size_t i, std::size_t j) { return w.weights(i, j); });
                 },
                 [&](const penalty_kind::Combined& c) { columnwise(t * c.lambda1, t * c.lambda2); },
             },
             spec.kind);
  return out;
}

Matrix penalty_slope(const PenaltySpec& spec, const Matrix& m, double lambda) {
  require_square(m, "penalty_slope");
  const std::size_t p = m.rows();
  const bool diag = spec.penalize_diagonal;
  Matrix slope(p, p);
  auto fill = [&](auto&& f) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) slope(i, j) = (diag || i != j) ? lambda * f(i, j) : 0.0;
  };
  std::visit(overloaded{
                 [&](const penalty_kind::L11&) { fill([](std::size_t, std::size_t) { return 1.0; }); },
                 [&](const penalty_kind::L12Sq&) {
                   // d/dm_ij of sum_k c_k^2 is 2 c_j sign(m_ij); averaging the
                   // (i,j) and (j,i) contributions gives c_i + c_j.
                   const auto c = column_abs_sums(m, diag);
                   fill([&](std::size_t i, std::size_t j) { return c[i] + c[j]; });
                 },
                 [&](const penalty_kind::WeightedL11& w) {
                   fill([&](std::size_t i, std::size_t j) { return w.weights(i, j); });
                 },
                 [&](const penalty_kind::Combined& cb) {
                   const auto c = column_abs_sums(m, diag);
                   fill([&](std::size_t i, std::size_t j) {
                     return cb.lambda1 + cb.lambda2 * (c[i] + c[j]);
                   });
                 },
             },
             spec.kind);
  return slope;
}

}  // namespace sglasso
