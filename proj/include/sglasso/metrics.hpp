#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sglasso/matrix.hpp"
#include "sglasso/solver.hpp"

namespace sglasso {

/// Undirected graph on p nodes. Adjacency is symmetric with a false diagonal.
class GraphModel {
 public:
  GraphModel() = default;
  explicit GraphModel(std::size_t p) : adj_(p) {}
  /// Throws std::invalid_argument on an asymmetric matrix or a self-loop.
  explicit GraphModel(BoolMatrix adj);
  static GraphModel from_edges(std::size_t p,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t p() const noexcept { return adj_.size(); }
  bool has_edge(std::size_t i, std::size_t j) const { return i != j && adj_(i, j); }
  void add_edge(std::size_t i, std::size_t j);
  const BoolMatrix& adjacency() const noexcept { return adj_; }
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  /// Unordered pairs (i, j), i < j, in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const GraphModel&, const GraphModel&) = default;

 private:
  BoolMatrix adj_;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  double lambda_used = 0.0;
  double kl = 0.0;
  double frobenius = 0.0;
  ConfusionCounts confusion;
  double f1 = 0.0;
};

/// log det omega0 - log det omega_hat + tr(omega_hat omega0^{-1}) - p.
/// Throws NotPositiveDefinite.
double kl_loss(const Matrix& omega_hat, const Matrix& omega0);
double frobenius_loss(const Matrix& omega_hat, const Matrix& omega0);

GraphModel support_graph(const PrecisionEstimate& est);
GraphModel support_graph(const BoolMatrix& support);

ConfusionCounts confusion(const GraphModel& est, const GraphModel& truth);
/// 2tp / (2tp + fp + fn); 1 when all three are zero.
double f1_score(const ConfusionCounts& c);

/// Fraction of indices where a < b. Ties are not wins.
double dominance_fraction(const std::vector<double>& a, const std::vector<double>& b);

MetricsReport evaluate(const PrecisionEstimate& est, const Matrix& omega0, const GraphModel& truth,
                       double lambda);

/// lambda,kl,frobenius,tp,fp,fn,tn,f1
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);
nlohmann::json metrics_to_json(const MetricsReport& r);

}  // namespace sglasso
