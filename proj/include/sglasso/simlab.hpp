#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sglasso/metrics.hpp"
#include "sglasso/penalty.hpp"
#include "sglasso/random.hpp"
#include "sglasso/solver.hpp"

namespace sglasso {

struct TrueModel {
  std::string id;
  std::size_t p = 0;
  GraphModel graph;
  Matrix omega0;
  std::string description;
};

/// Builds omega0 with `edge_value` on edges and 1 on the diagonal.
/// Throws NotPositiveDefinite if the result is not PD.
TrueModel make_model(std::string id, const GraphModel& graph, std::string description,
                     double edge_value = 0.2);

/// Model around a printed precision matrix; the graph is its off-diagonal support.
TrueModel make_model_from_precision(std::string id, const Matrix& omega0, std::string description);

std::vector<std::string> model_ids();
/// Throws std::invalid_argument for an unknown id.
TrueModel model_registry(const std::string& id);

/// T x p draws from N(0, omega0^{-1}).
Matrix generate_dataset(const TrueModel& model, std::size_t T, const RngStream& stream);

/// n log-spaced points on [lo, hi], strictly increasing.
std::vector<double> log_grid(double lo, double hi, std::size_t n);
/// 40 points on [0.005, 1].
std::vector<double> default_lambda_grid();

struct CvOptions {
  /// Permute rows before splitting. Off by default; folds are contiguous.
  bool shuffle = false;
  std::uint64_t shuffle_seed = 0;
};

struct CvResult {
  std::vector<double> lambda_grid;
  /// Mean validation score per grid point; NaN where excluded.
  std::vector<double> cv_scores;
  double best_lambda = 0.0;
  /// Grid points dropped because a fold fit failed.
  std::vector<double> excluded;
};

/// Thrown when every grid point fails to fit.
class CvFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Score of a fit against held-out data: -log det omega + tr(omega S_val).
double cv_score(const Matrix& omega, const Matrix& sigma_val);

CvResult cross_validate(const Matrix& data, const PenaltySpec& spec,
                        const std::vector<double>& lambda_grid, const SolverConfig& cfg = {},
                        const CvOptions& opts = {});

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and standard error (sample sd / sqrt(n)); se = 0 for n = 1.
/// Sums pairwise in index order.
MeanSe mean_se(const std::vector<double>& xs);

struct McRow {
  std::uint64_t stream = 0;
  bool ok = false;
  MetricsReport metrics;
};

struct McSummary {
  std::string model_id;
  std::string estimator;
  std::size_t T = 0;
  std::size_t reps = 0;
  MeanSe best_lambda;
  MeanSe kl;
  MeanSe frobenius;
  MeanSe f1;
  std::size_t nonconverged_count = 0;
  std::vector<McRow> rows;
};

struct McOptions {
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  SolverConfig solver;
  CvOptions cv;
};

/// Replication r draws its data from stream r of master_seed, cross-validates,
/// refits at the chosen lambda and scores against omega0.
McSummary monte_carlo(const TrueModel& model, std::size_t T, std::size_t reps,
                      const PenaltySpec& spec, const std::vector<double>& lambda_grid,
                      std::uint64_t master_seed, const McOptions& opts = {});
/// Same, over an explicit list of stream indices.
McSummary monte_carlo_streams(const TrueModel& model, std::size_t T,
                              const std::vector<std::uint64_t>& streams, const PenaltySpec& spec,
                              const std::vector<double>& lambda_grid, std::uint64_t master_seed,
                              const McOptions& opts = {});

struct SweepSide {
  std::string estimator;
  MeanSe min_kl;
  MeanSe min_frobenius;
  MeanSe argmin_kl_lambda;
  std::vector<double> per_rep_min_kl;
  std::vector<double> per_rep_min_frobenius;
};

struct SweepResult {
  std::string model_id;
  std::size_t T = 0;
  std::size_t reps = 0;
  SweepSide a;
  SweepSide b;
  /// Fraction of replications where a's minimum KL is below b's.
  double dominance_kl = 0.0;
  std::size_t nonconverged_count = 0;
};

/// Oracle tuning: per replication, the smallest KL and Frobenius loss over
/// the grid for two estimators fitted to the same data.
SweepResult lambda_sweep_min_losses(const TrueModel& model, std::size_t T, std::size_t reps,
                                    const PenaltySpec& a, const PenaltySpec& b,
                                    const std::vector<double>& lambda_grid,
                                    std::uint64_t master_seed, const McOptions& opts = {});

/// Non-edge (i, j), i < j, maximizing d_i + d_j; ties go to the pair met
/// first in column-major order. Throws std::invalid_argument for a complete graph.
std::pair<std::size_t, std::size_t> recovery_target(const TrueModel& model);

struct RecoveryCurve {
  std::pair<std::size_t, std::size_t> target;
  std::vector<double> lambda_grid;
  std::vector<double> probability;
  std::size_t nonconverged_count = 0;
};

/// Per lambda, the fraction of replications whose fitted support drops the
/// target pair. Replications with a failed fit count as not recovered.
RecoveryCurve recovery_probability(const TrueModel& model, std::size_t T,
                                   const std::vector<double>& lambda_grid, std::size_t reps,
                                   const PenaltySpec& spec, std::uint64_t master_seed,
                                   const McOptions& opts = {});

std::string mc_csv_header();
std::string mc_csv_row(const McSummary& s);
nlohmann::json mc_to_json(const McSummary& s);
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepResult& s);
nlohmann::json sweep_to_json(const SweepResult& s);
/// lambda,prob_sglasso,prob_glasso
std::string recovery_csv(const RecoveryCurve& sglasso, const RecoveryCurve& glasso);

/// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace sglasso
