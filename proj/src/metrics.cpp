#include "sglasso/metrics.hpp"

#include <stdexcept>

#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"

namespace sglasso {

GraphModel::GraphModel(BoolMatrix adj) : adj_(std::move(adj)) {
  if (!adj_.symmetric()) throw std::invalid_argument("graph: adjacency must be symmetric");
  for (std::size_t i = 0; i < adj_.size(); ++i)
    if (adj_(i, i)) throw std::invalid_argument("graph: self-loop at node " + std::to_string(i + 1));
}

GraphModel GraphModel::from_edges(std::size_t p,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  GraphModel g(p);
  for (auto [i, j] : edges) g.add_edge(i, j);
  return g;
}

void GraphModel::add_edge(std::size_t i, std::size_t j) {
  if (i >= p() || j >= p()) throw std::out_of_range("graph: node index out of range");
  if (i == j) throw std::invalid_argument("graph: self-loop at node " + std::to_string(i + 1));
  adj_.set_symmetric(i, j, true);
}

std::size_t GraphModel::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < p(); ++j) d += has_edge(i, j) ? 1 : 0;
  return d;
}

std::size_t GraphModel::edge_count() const { return adj_.count() / 2; }

std::vector<std::pair<std::size_t, std::size_t>> GraphModel::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < p(); ++i)
    for (std::size_t j = i + 1; j < p(); ++j)
      if (adj_(i, j)) out.emplace_back(i, j);
  return out;
}

double kl_loss(const Matrix& omega_hat, const Matrix& omega0) {
  require_same_shape(omega_hat, omega0, "kl_loss");
  const double p = static_cast<double>(omega0.rows());
  return log_det(omega0) - log_det(omega_hat) + trace_product(omega_hat, inverse_spd(omega0)) - p;
}

double frobenius_loss(const Matrix& omega_hat, const Matrix& omega0) {
  require_same_shape(omega_hat, omega0, "frobenius_loss");
  return frobenius_norm(omega_hat - omega0);
}

GraphModel support_graph(const BoolMatrix& support) {
  const std::size_t p = support.size();
  GraphModel g(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (support(i, j) || support(j, i)) g.add_edge(i, j);
  return g;
}

GraphModel support_graph(const PrecisionEstimate& est) { return support_graph(est.support); }

ConfusionCounts confusion(const GraphModel& est, const GraphModel& truth) {
  if (est.p() != truth.p()) throw DimensionError("confusion: graphs differ in node count");
  ConfusionCounts c;
  for (std::size_t i = 0; i < est.p(); ++i)
    for (std::size_t j = i + 1; j < est.p(); ++j) {
      const bool e = est.has_edge(i, j);
      const bool t = truth.has_edge(i, j);
      if (e && t) ++c.tp;
      else if (e) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  if (denom == 0.0) return 1.0;
  return 2.0 * static_cast<double>(c.tp) / denom;
}

double dominance_fraction(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("dominance_fraction: length mismatch");
  if (a.empty()) return 0.0;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < a.size(); ++i) wins += a[i] < b[i] ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(a.size());
}

MetricsReport evaluate(const PrecisionEstimate& est, const Matrix& omega0, const GraphModel& truth,
                       double lambda) {
  MetricsReport r;
  r.lambda_used = lambda;
  r.kl = kl_loss(est.omega, omega0);
  r.frobenius = frobenius_loss(est.omega, omega0);
  r.confusion = confusion(support_graph(est), truth);
  r.f1 = f1_score(r.confusion);
  return r;
}

std::string metrics_csv_header() { return "lambda,kl,frobenius,tp,fp,fn,tn,f1"; }

std::string metrics_csv_row(const MetricsReport& r) {
  const auto& c = r.confusion;
  return format_double(r.lambda_used) + ',' + format_double(r.kl) + ',' +
         format_double(r.frobenius) + ',' + std::to_string(c.tp) + ',' + std::to_string(c.fp) +
         ',' + std::to_string(c.fn) + ',' + std::to_string(c.tn) + ',' + format_double(r.f1);
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  return {{"lambda", r.lambda_used},
          {"kl", r.kl},
          {"frobenius", r.frobenius},
          {"tp", r.confusion.tp},
          {"fp", r.confusion.fp},
          {"fn", r.confusion.fn},
          {"tn", r.confusion.tn},
          {"f1", r.f1}};
}

}  // namespace sglasso
