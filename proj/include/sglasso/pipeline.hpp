#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sglasso/metrics.hpp"
#include "sglasso/simlab.hpp"
#include "sglasso/solver.hpp"

namespace sglasso {

enum class PanelFormat { long_csv, wide_csv };

PanelFormat parse_panel_format(const std::string& s);

/// Firm-by-year panel. Matrices are T x p with firms in file order.
struct PanelData {
  std::vector<std::string> firms;
  std::vector<int> years;
  Matrix invest;
  Matrix value;
  Matrix capital;

  friend bool operator==(const PanelData&, const PanelData&) = default;
};

/// A cell or row is missing from an otherwise parseable panel.
class PanelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Long form: header firm_id,firm_name,year,invest,value,capital.
/// Wide form: header year,<firm>:invest,<firm>:value,<firm>:capital,...
/// Throws ParseError (with row/column) or PanelError.
PanelData parse_panel(const std::string& text, PanelFormat format);
PanelData load_panel(const std::string& path, PanelFormat format);
std::string panel_to_csv(const PanelData& panel, PanelFormat format);

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FirstStageResult {
  /// p x 3: intercept, value coefficient, capital coefficient.
  Matrix betas;
  /// T x p.
  Matrix residuals;
};

/// Per-firm least squares of invest on (1, value, capital).
FirstStageResult first_stage_ols(const PanelData& panel);

struct EstimateOptions {
  SolverConfig solver;
  CvOptions cv;
  /// Scale residual columns to unit variance before estimation.
  bool standardize = false;
  /// Skip cross-validation and use this lambda.
  std::optional<double> fixed_lambda;
};

struct RunReport {
  double chosen_lambda = 0.0;
  PrecisionEstimate estimate;
  GraphModel graph;
  /// Nodes with degree >= p / 2. Descriptive only.
  std::vector<std::size_t> core_nodes;
  std::optional<CvResult> cv;
};

RunReport estimate_graph(const Matrix& residuals, const PenaltySpec& spec,
                         const std::vector<double>& lambda_grid, const EstimateOptions& opts = {});

nlohmann::json run_report_to_json(const RunReport& r, const std::vector<std::string>& labels);

}  // namespace sglasso
