#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sglasso/matrix.hpp"
#include "sglasso/penalty.hpp"
#include "sglasso/random.hpp"

namespace sglasso {

enum class LimitFlavor { sglasso_limit, glasso_limit };

LimitFlavor parse_flavor(const std::string& s);
std::string to_string(LimitFlavor f);

struct LimitProblem {
  Matrix omega0;
  Matrix sigma0;
  double lambda0 = 0.0;
  DegreeVector degrees;
  /// True where omega0_ij == 0.
  BoolMatrix zero_pattern;

  static LimitProblem make(const Matrix& omega0, double lambda0);
};

struct LimitDraw {
  Matrix w;
  Matrix u_star;
};

/// vech ordering: (i, j) with i >= j, column by column.
std::vector<std::pair<std::size_t, std::size_t>> vech_index(std::size_t p);

/// Cov(W_ij, W_kl) = s_ik s_jl + s_il s_jk over vech pairs.
Matrix isserlis_lambda(const Matrix& sigma0);

/// Draws symmetric W with vech(W) ~ N(0, Lambda) through a PSD square root.
class WSampler {
 public:
  explicit WSampler(const Matrix& lambda_matrix);
  Matrix draw(Rng& rng) const;
  std::size_t p() const noexcept { return p_; }

 private:
  std::size_t p_ = 0;
  Matrix root_;
};

Matrix draw_w(const Matrix& lambda_matrix, Rng& rng);

/// Per-entry penalty weights of the limit problem: lambda0 (d_i + d_j) for
/// the sglasso limit, lambda0 for the glasso limit.
Matrix limit_weights(const LimitProblem& problem, LimitFlavor flavor);

/// tr(U S U S) + tr(U W) + sum_ij weight_ij g_ij(u_ij).
double v_objective(const LimitProblem& problem, const Matrix& u, const Matrix& w, LimitFlavor flavor);
/// The sglasso limit written with column weights 2 lambda0 d_j.
double v_objective_column_form(const LimitProblem& problem, const Matrix& u, const Matrix& w);

struct MinimizeOptions {
  int max_iters = 100000;
  double tol = 1e-9;
  bool record_objective = false;
};

struct MinimizeResult {
  Matrix u;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

class LimitNonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Proximal gradient on symmetric U with an arbitrary symmetric weight matrix.
MinimizeResult minimize_v_weighted(const LimitProblem& problem, const Matrix& w,
                                   const Matrix& weights, const MinimizeOptions& opts = {});
MinimizeResult minimize_v_detail(const LimitProblem& problem, const Matrix& w, LimitFlavor flavor,
                                 const MinimizeOptions& opts = {});
/// Throws LimitNonConvergence when the iteration cap is hit.
Matrix minimize_v(const LimitProblem& problem, const Matrix& w, LimitFlavor flavor);

struct ZeroMassResult {
  /// Fraction of draws with |u*_ij| <= zero_tol where omega0_ij == 0; 0 elsewhere.
  Matrix mass;
  std::size_t draws = 0;
  std::vector<Matrix> samples;
};

/// Draw k uses stream k of master_seed.
ZeroMassResult zero_mass(const LimitProblem& problem, LimitFlavor flavor, std::size_t n_draws,
                         std::uint64_t master_seed, double zero_tol = 1e-8,
                         bool keep_samples = false, unsigned threads = 0);

/// draw,u_i_j,... with 1-based entry labels.
std::string scatter_csv(const std::vector<Matrix>& samples,
                        const std::vector<std::pair<std::size_t, std::size_t>>& entries);
/// Zero-mass matrix as i,j,mass rows over the zero pattern (1-based, i < j).
std::string zero_mass_csv(const LimitProblem& problem, const Matrix& mass);

}  // namespace sglasso
