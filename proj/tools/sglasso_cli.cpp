// Command line front end: estimate, simulate, sweep, recovery, asymptotic, grunfeld.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "sglasso/asymlab.hpp"
#include "sglasso/graph_io.hpp"
#include "sglasso/linalg.hpp"
#include "sglasso/matrix_io.hpp"
#include "sglasso/metrics.hpp"
#include "sglasso/pipeline.hpp"
#include "sglasso/simlab.hpp"
#include "sglasso/solver.hpp"

namespace fs = std::filesystem;
using namespace sglasso;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct SolverFlags {
  double rho = 1.0;
  int max_iters = 10000;
  double tol = 1e-8;
  unsigned threads = 0;

  void add(CLI::App* app) {
    app->add_option("--rho", rho, "Splitting step parameter")->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "Iteration cap per fit")->check(CLI::PositiveNumber);
    app->add_option("--tol", tol, "Primal and dual stopping tolerance")->check(CLI::PositiveNumber);
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }
  SolverConfig config() const {
    SolverConfig c;
    c.rho = rho;
    c.max_iters = max_iters;
    c.tol_primal = tol;
    c.tol_dual = tol;
    return c;
  }
};

struct PenaltyFlags {
  std::string penalty = "sglasso";
  bool no_diag = false;
  std::string weights_path;
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  void add(CLI::App* app, const std::string& def = "sglasso") {
    penalty = def;
    app->add_option("--penalty", penalty, "glasso | sglasso | weighted | combined")
        ->check(CLI::IsMember({"glasso", "sglasso", "weighted", "combined"}));
    app->add_flag("--no-diag-penalty", no_diag, "Leave the diagonal unpenalized");
    app->add_option("--weights", weights_path, "CSV weight matrix for --penalty weighted");
    app->add_option("--lambda1", lambda1, "L11 coefficient for --penalty combined");
    app->add_option("--lambda2", lambda2, "squared L12 coefficient for --penalty combined");
  }

  // `truth` supplies degree weights when no weight file is given.
  PenaltySpec spec(const Matrix* truth = nullptr) const {
    const bool diag = !no_diag;
    if (penalty == "glasso") return PenaltySpec::glasso(diag);
    if (penalty == "sglasso") return PenaltySpec::sglasso(diag);
    if (penalty == "combined") return PenaltySpec::combined(lambda1, lambda2, diag);
    if (!weights_path.empty()) return PenaltySpec::weighted(matrix_from_csv(read_text_file(weights_path)), diag);
    if (truth) return PenaltySpec::weighted(2.0 * degree_penalty_matrix(*truth), diag);
    throw std::invalid_argument("--penalty weighted needs --weights");
  }
};

// Only for --help; the file itself is expanded by expand_config before parsing.
void add_config_option(CLI::App* app) {
  static std::string ignored;
  app->add_option("--config", ignored, "key=value file mirroring the flags; flags given on the command line win");
}

bool is_flag_key(const std::string& key) {
  return key == "no-diag-penalty" || key == "cv" || key == "shuffle" || key == "standardize";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Config entries become "--key value" tokens placed right after the subcommand,
// so anything later on the command line overrides them.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> out{args.front()};
  std::vector<std::string> rest;
  std::vector<std::string> from_file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError(path + ":" + std::to_string(n) + ": expected key=value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      std::replace(key.begin(), key.end(), '_', '-');
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
        value = value.substr(1, value.size() - 2);
      if (is_flag_key(key)) {
        if (value == "true" || value == "1" || value == "yes" || value == "on") from_file.push_back("--" + key);
        else if (!(value == "false" || value == "0" || value == "no" || value == "off"))
          throw ParseError(path + ":" + std::to_string(n) + ": " + key + " expects true or false");
        continue;
      }
      from_file.push_back("--" + key);
      from_file.push_back(value);
    }
  }
  if (rest.empty()) return args;
  out.push_back(rest.front());
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.empty() || s == "default") return default_lambda_grid();
  if (s.find(':') != std::string::npos) {
    double lo = 0, hi = 0;
    std::size_t n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
      throw std::invalid_argument("--grid: expected lo:hi:n, a comma list, or 'default'");
    return log_grid(lo, hi, n);
  }
  std::vector<double> g;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("--grid: bad value '" + item + "'");
    g.push_back(v);
  }
  return g;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& path, const std::string& text) {
  write_text_file(path.string(), text);
  std::cerr << "wrote " << path.string() << '\n';
}

std::vector<std::string> node_labels(std::size_t p) {
  std::vector<std::string> l;
  for (std::size_t i = 0; i < p; ++i) l.push_back(std::to_string(i + 1));
  return l;
}

void write_graphs(const fs::path& out, const std::string& stem, const GraphModel& g,
                  const std::vector<std::string>& labels) {
  for (auto f : {GraphFormat::dot, GraphFormat::json_adjacency, GraphFormat::edge_csv})
    write(out / (stem + "." + graph_format_extension(f)), render_graph(g, f, labels));
}

// --- estimate ---------------------------------------------------------------

struct EstimateCmd {
  std::string input;
  std::string kind = "data";
  std::optional<double> lambda;
  bool cv = false;
  std::string grid = "default";
  std::uint64_t seed = 0;
  bool shuffle = false;
  std::string out = "sglasso_out";
  PenaltyFlags pen;
  SolverFlags solver;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("estimate", "Fit one precision matrix");
    add_config_option(c);
    c->add_option("--input", input, "Data CSV (rows = observations) or covariance CSV")->required();
    c->add_option("--input-kind", kind, "data | covariance")->check(CLI::IsMember({"data", "covariance"}));
    c->add_option("--lambda", lambda, "Penalty level")->check(CLI::NonNegativeNumber);
    c->add_flag("--cv", cv, "Choose lambda by two-fold cross-validation (data input only)");
    c->add_option("--grid", grid, "lo:hi:n log grid, comma list, or 'default'");
    c->add_option("--seed", seed, "Seed for --shuffle");
    c->add_flag("--shuffle", shuffle, "Shuffle rows before forming folds");
    c->add_option("--out", out, "Output directory");
    pen.add(c);
    solver.add(c);
    c->callback([this] { code = run(); });
  }

  int run() const {
    if (lambda.has_value() == cv) throw std::invalid_argument("estimate: give exactly one of --lambda or --cv");
    const Matrix m = matrix_from_csv(read_text_file(input));
    const PenaltySpec spec = pen.spec();
    const SolverConfig cfg = solver.config();
    Matrix s;
    std::optional<CvResult> cvres;
    double lam = lambda.value_or(0.0);
    if (kind == "covariance") {
      if (cv) throw std::invalid_argument("estimate: --cv needs --input-kind data");
      s = m;
    } else {
      s = sample_covariance(demean_columns(m));
      if (cv) {
        CvOptions o;
        o.shuffle = shuffle;
        o.shuffle_seed = seed;
        cvres = cross_validate(demean_columns(m), spec, parse_grid(grid), cfg, o);
        lam = cvres->best_lambda;
      }
    }
    const auto est = solve(s, lam, spec, cfg);
    const auto outdir = prepare_out(out);
    RunReport r;
    r.chosen_lambda = lam;
    r.estimate = est;
    r.graph = support_graph(est);
    r.cv = cvres;
    const auto labels = node_labels(s.rows());
    write(outdir / "omega.csv", matrix_to_csv(est.omega));
    write(outdir / "report.json", run_report_to_json(r, labels).dump(2) + '\n');
    write_graphs(outdir, "graph", r.graph, labels);
    std::cout << "lambda=" << format_double(lam) << " edges=" << r.graph.edge_count()
              << " iterations=" << est.iterations << " converged=" << (est.converged ? 1 : 0) << '\n';
    return est.converged ? kExitOk : kExitNonConvergence;
  }

  int code = kExitOk;
};

// --- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string model = "CORE_PERIPHERY10";
  std::size_t T = 50;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::string grid = "default";
  std::string out = "sglasso_out";
  PenaltyFlags pen;
  SolverFlags solver;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("simulate", "Monte Carlo with cross-validated lambda");
    add_config_option(c);
    c->add_option("--model", model, "Registry model id");
    c->add_option("--T", T, "Sample size")->check(CLI::Range(std::size_t{4}, std::size_t{1} << 30));
    c->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "Master seed");
    c->add_option("--grid", grid, "lo:hi:n log grid, comma list, or 'default'");
    c->add_option("--out", out, "Output directory");
    pen.add(c);
    solver.add(c);
    c->callback([this] { code = run(); });
  }

  int run() const {
    const TrueModel m = model_registry(model);
    const PenaltySpec spec = pen.spec(&m.omega0);
    McOptions o;
    o.threads = solver.threads;
    o.solver = solver.config();
    const McSummary s = monte_carlo(m, T, reps, spec, parse_grid(grid), seed, o);
    const auto outdir = prepare_out(out);
    const std::string stem = "simulate_" + m.id + "_" + s.estimator + "_T" + std::to_string(T);
    write(outdir / (stem + ".csv"), mc_csv_header() + '\n' + mc_csv_row(s) + '\n');
    std::string per = "stream,ok," + metrics_csv_header() + '\n';
    for (const auto& row : s.rows)
      per += std::to_string(row.stream) + ',' + (row.ok ? "1," : "0,") + metrics_csv_row(row.metrics) + '\n';
    write(outdir / (stem + "_replications.csv"), per);
    write(outdir / (stem + ".json"), mc_to_json(s).dump(2) + '\n');
    std::cout << mc_csv_header() << '\n' << mc_csv_row(s) << '\n';
    return s.nonconverged_count == 0 ? kExitOk : kExitNonConvergence;
  }

  int code = kExitOk;
};

// --- sweep ------------------------------------------------------------------

struct SweepCmd {
  std::string model = "CORE_PERIPHERY10";
  std::size_t T = 50;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::string grid = "default";
  std::string out = "sglasso_out";
  std::string penalty_a = "sglasso";
  std::string penalty_b = "glasso";
  bool no_diag = false;
  SolverFlags solver;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("sweep", "Minimum KL and Frobenius loss over a lambda grid");
    add_config_option(c);
    c->add_option("--model", model, "Registry model id");
    c->add_option("--T", T, "Sample size")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    c->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "Master seed");
    c->add_option("--grid", grid, "lo:hi:n log grid, comma list, or 'default'");
    c->add_option("--out", out, "Output directory");
    const auto kinds = CLI::IsMember({"glasso", "sglasso", "weighted"});
    c->add_option("--penalty-a", penalty_a, "First estimator")->check(kinds);
    c->add_option("--penalty-b", penalty_b, "Second estimator")->check(kinds);
    c->add_flag("--no-diag-penalty", no_diag, "Leave the diagonal unpenalized");
    solver.add(c);
    c->callback([this] { code = run(); });
  }

  int run() const {
    const TrueModel m = model_registry(model);
    auto spec_of = [&](const std::string& k) {
      PenaltyFlags f;
      f.penalty = k;
      f.no_diag = no_diag;
      return f.spec(&m.omega0);
    };
    McOptions o;
    o.threads = solver.threads;
    o.solver = solver.config();
    const SweepResult r =
        lambda_sweep_min_losses(m, T, reps, spec_of(penalty_a), spec_of(penalty_b), parse_grid(grid), seed, o);
    const auto outdir = prepare_out(out);
    const std::string stem = "sweep_" + m.id + "_T" + std::to_string(T);
    write(outdir / (stem + ".csv"), sweep_csv_header() + '\n' + sweep_csv_row(r) + '\n');
    write(outdir / (stem + ".json"), sweep_to_json(r).dump(2) + '\n');
    std::cout << sweep_csv_header() << '\n' << sweep_csv_row(r) << '\n';
    return r.nonconverged_count == 0 ? kExitOk : kExitNonConvergence;
  }

  int code = kExitOk;
};

// --- recovery ---------------------------------------------------------------

struct RecoveryCmd {
  std::string model = "AR1_4_HALF";
  std::size_t T = 20;
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  std::string grid = "default";
  std::string out = "sglasso_out";
  bool no_diag = false;
  SolverFlags solver;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("recovery", "Probability of dropping the highest-degree non-edge");
    add_config_option(c);
    c->add_option("--model", model, "Registry model id");
    c->add_option("--T", T, "Sample size")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    c->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "Master seed");
    c->add_option("--grid", grid, "lo:hi:n log grid, comma list, or 'default'");
    c->add_option("--out", out, "Output directory");
    c->add_flag("--no-diag-penalty", no_diag, "Leave the diagonal unpenalized");
    solver.add(c);
    c->callback([this] { code = run(); });
  }

  int run() const {
    const TrueModel m = model_registry(model);
    McOptions o;
    o.threads = solver.threads;
    o.solver = solver.config();
    const auto g = parse_grid(grid);
    const auto sg = recovery_probability(m, T, g, reps, PenaltySpec::sglasso(!no_diag), seed, o);
    const auto gl = recovery_probability(m, T, g, reps, PenaltySpec::glasso(!no_diag), seed, o);
    const auto outdir = prepare_out(out);
    write(outdir / ("recovery_" + m.id + "_T" + std::to_string(T) + ".csv"), recovery_csv(sg, gl));
    std::cout << "target=(" << sg.target.first + 1 << ',' << sg.target.second + 1 << ")\n";
    return sg.nonconverged_count + gl.nonconverged_count == 0 ? kExitOk : kExitNonConvergence;
  }

  int code = kExitOk;
};

// --- asymptotic -------------------------------------------------------------

struct AsymptoticCmd {
  std::string model = "AR1_4_HALF";
  double lambda0 = 1.0;
  std::size_t draws = 2000;
  std::string flavor = "both";
  std::uint64_t seed = 1;
  double zero_tol = 1e-8;
  unsigned threads = 0;
  std::string out = "sglasso_out";

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("asymptotic", "Simulate the limit law and its zero masses");
    add_config_option(c);
    c->add_option("--model", model, "Registry model id");
    c->add_option("--lambda0", lambda0, "Limit penalty level")->check(CLI::NonNegativeNumber);
    c->add_option("--draws", draws, "Number of draws")->check(CLI::PositiveNumber);
    c->add_option("--flavor", flavor, "sglasso | glasso | both")->check(CLI::IsMember({"sglasso", "glasso", "both"}));
    c->add_option("--seed", seed, "Master seed");
    c->add_option("--zero-tol", zero_tol, "Magnitude counted as zero")->check(CLI::NonNegativeNumber);
    c->add_option("--threads", threads, "Worker threads (0 = all cores)");
    c->add_option("--out", out, "Output directory");
    c->callback([this] { code = run(); });
  }

  int run() const {
    const TrueModel m = model_registry(model);
    const auto lp = LimitProblem::make(m.omega0, lambda0);
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t i = 0; i < m.p; ++i)
      for (std::size_t j = i + 1; j < m.p; ++j)
        if (lp.zero_pattern(i, j)) entries.emplace_back(i, j);
    const auto outdir = prepare_out(out);
    std::vector<LimitFlavor> flavors;
    if (flavor != "glasso") flavors.push_back(LimitFlavor::sglasso_limit);
    if (flavor != "sglasso") flavors.push_back(LimitFlavor::glasso_limit);
    for (auto f : flavors) {
      const auto z = zero_mass(lp, f, draws, seed, zero_tol, true, threads);
      const std::string stem = m.id + "_" + to_string(f);
      write(outdir / ("zero_mass_" + stem + ".csv"), zero_mass_csv(lp, z.mass));
      write(outdir / ("scatter_" + stem + ".csv"), scatter_csv(z.samples, entries));
      for (auto [i, j] : entries)
        std::cout << to_string(f) << " P(U_" << i + 1 << j + 1 << "=0)=" << format_double(z.mass(i, j)) << '\n';
    }
    return kExitOk;
  }

  int code = kExitOk;
};

// --- grunfeld ---------------------------------------------------------------

struct GrunfeldCmd {
  std::string data = "data/grunfeld.csv";
  std::string format = "long";
  std::optional<double> lambda;
  std::string grid = "default";
  std::string variable = "residual";
  bool standardize = false;
  std::string out = "sglasso_out";
  PenaltyFlags pen;
  SolverFlags solver;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("grunfeld", "Investment panel: first-stage OLS and residual graph");
    add_config_option(c);
    c->add_option("--data", data, "Panel CSV");
    c->add_option("--format", format, "long | wide")->check(CLI::IsMember({"long", "wide"}));
    c->add_option("--lambda", lambda, "Fixed penalty level (default: cross-validate)")->check(CLI::NonNegativeNumber);
    c->add_option("--grid", grid, "lo:hi:n log grid, comma list, or 'default'");
    c->add_option("--variable", variable, "residual | invest")->check(CLI::IsMember({"residual", "invest"}));
    c->add_flag("--standardize", standardize, "Scale each series to unit variance first");
    c->add_option("--out", out, "Output directory");
    pen.add(c);
    solver.add(c);
    c->callback([this] { code = run(); });
  }

  int run() const {
    const PanelData panel = load_panel(data, parse_panel_format(format));
    const auto outdir = prepare_out(out);
    Matrix series;
    if (variable == "residual") {
      const auto fsr = first_stage_ols(panel);
      series = fsr.residuals;
      write(outdir / "residuals.csv", matrix_to_csv(fsr.residuals));
      write(outdir / "betas.csv", matrix_to_csv(fsr.betas));
    } else {
      series = panel.invest;
    }
    EstimateOptions o;
    o.solver = solver.config();
    o.standardize = standardize;
    o.fixed_lambda = lambda;
    const RunReport r = estimate_graph(series, pen.spec(), parse_grid(grid), o);
    write(outdir / "report.json", run_report_to_json(r, panel.firms).dump(2) + '\n');
    write(outdir / "omega.csv", matrix_to_csv(r.estimate.omega));
    write_graphs(outdir, "graph", r.graph, panel.firms);
    std::cout << "lambda=" << format_double(r.chosen_lambda) << " edges:";
    for (auto [i, j] : r.graph.edges()) std::cout << ' ' << i + 1 << '-' << j + 1;
    std::cout << "\ncore:";
    for (auto i : r.core_nodes) std::cout << ' ' << i + 1;
    std::cout << '\n';
    return r.estimate.converged ? kExitOk : kExitNonConvergence;
  }

  int code = kExitOk;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured graphical lasso toolkit"};
  app.name("sglasso");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  EstimateCmd estimate;
  SimulateCmd simulate;
  SweepCmd sweep;
  RecoveryCmd recovery;
  AsymptoticCmd asymptotic;
  GrunfeldCmd grunfeld;
  estimate.add(app);
  simulate.add(app);
  sweep.add(app);
  recovery.add(app);
  asymptotic.add(app);
  grunfeld.add(app);
  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const CvFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const LimitNonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  for (int code : {estimate.code, simulate.code, sweep.code, recovery.code, asymptotic.code, grunfeld.code})
    if (code != kExitOk) return code;
  return kExitOk;
}
