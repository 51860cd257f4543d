#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmp/io.hpp"
#include "gmp/metrics.hpp"
#include "gmp/pursuit.hpp"

namespace gmp::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct FitFlags {
  int rank = 0;
  std::optional<std::size_t> sparsity_u;
  std::optional<std::size_t> sparsity_v;
  bool nonneg_u = false;
  bool nonneg_v = false;
  bool symmetric = false;
  int corrections = 0;
  int restarts = 5;
  int power_iters = 250;
  double gap_tol = 1e-8;
  double delta = 1.0;
  std::uint64_t seed = 0;
  std::string format;
  std::string out;
  std::string mode;
};

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--rank", f.rank, "Maximum number of rank-one terms")->required();
  app->add_option("--sparsity-u", f.sparsity_u, "Nonzeros allowed in each left factor");
  app->add_option("--sparsity-v", f.sparsity_v, "Nonzeros allowed in each right factor");
  app->add_flag("--nonneg-u", f.nonneg_u, "Constrain left factors to be non-negative");
  app->add_flag("--nonneg-v", f.nonneg_v, "Constrain right factors to be non-negative");
  app->add_option("--corrections", f.corrections, "Cyclic atom-correction passes per iteration (0 = off)");
  app->add_option("--restarts", f.restarts, "Power-method restarts per oracle call");
  app->add_option("--power-iters", f.power_iters, "Maximum power iterations per restart");
  app->add_option("--gap-tol", f.gap_tol, "Relative Frank-Wolfe gap that stops a power run");
  app->add_option("--delta", f.delta, "Degrade every oracle answer to this accuracy (experiments)");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--format", f.format, "Input format: csv, mm or triples (default: from extension)");
  app->add_option("--out", f.out, "Output directory for report.json, trace.csv and model.factors");
}

AtomSpec make_spec(std::size_t dim, std::optional<std::size_t> k, bool nonneg, const char* side) {
  try {
    if (k) return nonneg ? AtomSpec::sparse_non_negative(dim, *k) : AtomSpec::sparse(dim, *k);
    return nonneg ? AtomSpec::non_negative(dim) : AtomSpec::unit_sphere(dim);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(side) + ": " + e.what());
  }
}

PursuitConfig make_config(const FitFlags& f) {
  if (f.rank < 1) throw UsageError("--rank must be at least 1");
  if (f.corrections < 0) throw UsageError("--corrections must be >= 0");
  if (f.restarts < 1) throw UsageError("--restarts must be >= 1");
  if (f.power_iters < 1) throw UsageError("--power-iters must be >= 1");
  if (!(f.gap_tol >= 0.0)) throw UsageError("--gap-tol must be >= 0");
  if (!(f.delta > 0.0 && f.delta <= 1.0)) throw UsageError("--delta must be in (0, 1]");
  PursuitConfig c;
  c.max_rank = f.rank;
  c.correction_passes = f.corrections;
  c.seed = f.seed;
  c.delta = f.delta;
  c.power.restarts = f.restarts;
  c.power.max_iterations = f.power_iters;
  c.power.gap_tolerance = f.gap_tol;
  c.power.seed = f.seed;
  return c;
}

json config_echo(const std::string& command, const std::string& input, const FitFlags& f) {
  json j;
  j["command"] = command;
  j["input"] = input;
  j["mode"] = f.mode;
  j["rank"] = f.rank;
  j["sparsity_u"] = f.sparsity_u ? json(*f.sparsity_u) : json(nullptr);
  j["sparsity_v"] = f.sparsity_v ? json(*f.sparsity_v) : json(nullptr);
  j["nonneg_u"] = f.nonneg_u;
  j["nonneg_v"] = f.nonneg_v;
  j["symmetric"] = f.symmetric;
  j["corrections"] = f.corrections;
  j["restarts"] = f.restarts;
  j["power_iters"] = f.power_iters;
  j["gap_tol"] = f.gap_tol;
  j["delta"] = f.delta;
  j["seed"] = f.seed;
  return j;
}

json trace_json(const PursuitTrace& trace) {
  json rows = json::array();
  for (const auto& r : trace.records) {
    json row;
    row["iteration"] = r.iteration;
    row["cost"] = r.cost;
    row["residual_norm"] = r.residual_norm;
    row["lmo_value"] = r.lmo_value;
    row["lmo_gap"] = r.lmo_gap;
    row["corrections"] = r.corrections_applied;
    row["rank_deficient"] = r.rank_deficient;
    row["weights"] = std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_csv(const PursuitTrace& trace) {
  std::ostringstream os;
  os << "iteration,cost,residual_norm,lmo_value,lmo_gap,corrections\n";
  for (const auto& r : trace.records) {
    os << r.iteration << ',' << num(r.cost) << ',' << num(r.residual_norm) << ',' << num(r.lmo_value) << ','
       << num(r.lmo_gap) << ',' << r.corrections_applied << '\n';
  }
  return os.str();
}

json nan_to_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Dataset load(const std::string& input, const std::string& format) {
  DataFormat fmt;
  try {
    fmt = format.empty() ? guess_data_format(input) : parse_data_format(format);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return read_dataset(input, fmt);
}

void emit(const FitFlags& f, json report, const PursuitTrace& trace, const FactorFile& factors,
          std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::filesystem::create_directories(f.out);
  const std::filesystem::path dir(f.out);
  write_file_atomic(dir / "report.json", text);
  write_file_atomic(dir / "trace.csv", trace_csv(trace));
  write_file_atomic(dir / "model.factors", format_factor_file(factors));
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

Matrix covariance(const Matrix& X) {
  if (X.rows() < 2) throw UsageError("--covariance needs at least two samples");
  const Matrix centered = X.rowwise() - X.colwise().mean();
  Matrix C = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
  return (0.5 * (C + C.transpose())).eval();
}

// factorize -----------------------------------------------------------------

int cmd_factorize(const std::string& input, FitFlags f, bool use_covariance, std::ostream& out,
                  std::ostream& err) {
  const auto t_start = Clock::now();
  const PursuitConfig config = make_config(f);
  Dataset ds = load(input, f.format);
  std::vector<std::string> warnings = ds.warnings;
  if (!ds.fully_observed()) warnings.push_back("input is not fully observed; missing entries are treated as 0");
  Matrix Y = ds.to_dense();
  if (use_covariance) Y = covariance(Y);
  const double load_s = seconds_since(t_start);

  const auto n = static_cast<std::size_t>(Y.rows());
  const auto m = static_cast<std::size_t>(Y.cols());
  AtomSpec spec_u, spec_v;
  bool symmetric = f.symmetric;
  if (f.mode == "svd") {
    spec_u = make_spec(n, f.sparsity_u, f.nonneg_u, "--sparsity-u");
    spec_v = make_spec(m, f.sparsity_v, f.nonneg_v, "--sparsity-v");
  } else if (f.mode == "sparse-pca" || f.mode == "snn-pca") {
    if (!f.sparsity_u) throw UsageError("--mode " + f.mode + " requires --sparsity-u");
    symmetric = true;
    spec_u = make_spec(n, f.sparsity_u, f.mode == "snn-pca" || f.nonneg_u, "--sparsity-u");
    spec_v = spec_u;
  } else if (f.mode == "nmf") {
    spec_u = make_spec(n, f.sparsity_u, true, "--sparsity-u");
    spec_v = make_spec(m, f.sparsity_v, true, "--sparsity-v");
  } else if (f.mode == "sparse-nmf") {
    if (!f.sparsity_u || !f.sparsity_v) throw UsageError("--mode sparse-nmf requires --sparsity-u and --sparsity-v");
    spec_u = make_spec(n, f.sparsity_u, true, "--sparsity-u");
    spec_v = make_spec(m, f.sparsity_v, true, "--sparsity-v");
  } else {
    throw UsageError("unknown --mode '" + f.mode + "'");
  }
  if (symmetric) {
    if (n != m) throw UsageError("symmetric factorization needs a square input (try --covariance)");
    if ((Y - Y.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, Y.cwiseAbs().maxCoeff())) {
      throw UsageError("symmetric factorization needs a symmetric input (try --covariance)");
    }
    Y = (0.5 * (Y + Y.transpose())).eval();
    spec_v = spec_u;
  }
  if ((f.mode == "nmf" || f.mode == "sparse-nmf") && Y.minCoeff() < 0.0) {
    warnings.push_back("target has negative entries; non-negative factors cannot reproduce them");
  }
  f.symmetric = symmetric;

  const TargetProblem problem(Y, symmetric);
  const auto t_fit = Clock::now();
  auto [model, trace] = gmp_fit(problem, spec_u, spec_v, config);
  const double fit_s = seconds_since(t_fit);
  print_warnings(warnings, err);
  if (trace.lmo_failure_at_start) throw NumericalFailure("oracle failed at the first iteration (target is ~0)");

  const FitMetrics metrics = evaluate_fit(problem, model);
  json report;
  report["config"] = config_echo("factorize", input, f);
  if (use_covariance) report["config"]["covariance"] = true;
  report["shape"] = {Y.rows(), Y.cols()};
  report["atoms"] = {{"u", spec_u.to_string()}, {"v", spec_v.to_string()}};
  report["warnings"] = warnings;
  report["stop_reason"] = std::string(to_string(trace.stop_reason));
  report["initial_cost"] = trace.initial_cost;
  report["trace"] = trace_json(trace);
  report["metrics"] = {{"rank", model.rank()},
                       {"cost", metrics.cost},
                       {"reconstruction_error", metrics.reconstruction_error},
                       {"explained_variance_ratio", metrics.explained_variance_ratio}};
  report["timing"] = {{"load_s", load_s}, {"fit_s", fit_s}, {"total_s", seconds_since(t_start)}};
  emit(f, std::move(report), trace, FactorFile{model, spec_u, spec_v, symmetric}, out);
  return kSuccess;
}

// complete ------------------------------------------------------------------

struct EntrySet {
  std::vector<Coordinate> coords;
  std::vector<double> values;
};

int cmd_complete(const std::string& input, FitFlags f, const std::string& split_text, std::ostream& out,
                 std::ostream& err) {
  const auto t_start = Clock::now();
  const PursuitConfig config = make_config(f);
  SplitFractions fractions;
  try {
    fractions = SplitFractions::parse(split_text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--split: ") + e.what());
  }
  if (fractions.test <= 0.0) throw UsageError("--split: test evaluation needs a non-empty test fraction");
  if (f.mode != "plain" && f.mode != "sparse") throw UsageError("unknown --mode '" + f.mode + "' (plain or sparse)");
  if (f.symmetric) throw UsageError("complete does not support --symmetric");

  const Dataset ds = load(input, f.format);
  const auto labels = assign_splits(ds.size(), fractions, f.seed);
  EntrySet sets[3];
  for (std::size_t e = 0; e < ds.size(); ++e) {
    auto& s = sets[static_cast<int>(labels[e])];
    s.coords.push_back(ds.coords[e]);
    s.values.push_back(ds.values[e]);
  }
  const EntrySet& train = sets[static_cast<int>(Split::Train)];
  const EntrySet& valid = sets[static_cast<int>(Split::Validation)];
  const EntrySet& test = sets[static_cast<int>(Split::Test)];
  if (train.coords.empty()) throw UsageError("training split is empty");
  if (test.coords.empty()) throw UsageError("test split is empty");
  const double load_s = seconds_since(t_start);

  const auto n = static_cast<std::size_t>(ds.rows);
  const auto m = static_cast<std::size_t>(ds.cols);
  std::optional<std::size_t> k_v = f.sparsity_v;
  if (f.mode == "sparse" && !k_v) k_v = static_cast<std::size_t>(std::ceil(0.6 * static_cast<double>(m)));
  const AtomSpec spec_u = make_spec(n, f.sparsity_u, f.nonneg_u, "--sparsity-u");
  const AtomSpec spec_v = make_spec(m, k_v, f.nonneg_v, "--sparsity-v");

  const TargetProblem problem(ds.rows, ds.cols, train.coords, train.values);
  std::vector<FactorModel> snapshots;
  json per_rank = json::array();
  const auto t_fit = Clock::now();
  auto [model, trace] = gmp_fit(problem, spec_u, spec_v, config, [&](const FactorModel& mdl, const TraceRecord& rec) {
    snapshots.push_back(mdl);
    per_rank.push_back({{"rank", rec.iteration},
                        {"train_rmse", rmse(mdl, train.coords, train.values)},
                        {"validation_rmse", nan_to_null(rmse(mdl, valid.coords, valid.values))},
                        {"test_rmse", rmse(mdl, test.coords, test.values)}});
  });
  print_warnings(ds.warnings, err);
  if (trace.lmo_failure_at_start) throw NumericalFailure("oracle failed at the first iteration (target is ~0)");

  if (snapshots.empty()) snapshots.push_back(empty_model(ds.rows, ds.cols));
  std::size_t selected = snapshots.size() - 1;
  if (!valid.coords.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < snapshots.size(); ++r) {
      const double v = rmse(snapshots[r], valid.coords, valid.values);
      if (v < best) {
        best = v;
        selected = r;
      }
    }
  }
  FactorModel final_model = snapshots[selected];
  int final_corrections = 0;
  if (f.corrections > 0 && final_model.rank() > 0) {
    PowerConfig pc = config.power;
    pc.seed = config.seed ^ 0xF1A1ULL;
    auto corrected = correct_atoms(problem, final_model, spec_u, spec_v, pc, f.corrections);
    final_model = std::move(corrected.model);
    final_corrections = corrected.accepted;
  }
  const double fit_s = seconds_since(t_fit);

  json report;
  report["config"] = config_echo("complete", input, f);
  report["config"]["split"] = {fractions.train, fractions.validation, fractions.test};
  report["shape"] = {ds.rows, ds.cols};
  report["atoms"] = {{"u", spec_u.to_string()}, {"v", spec_v.to_string()}};
  report["warnings"] = ds.warnings;
  report["entries"] = {{"train", train.coords.size()}, {"validation", valid.coords.size()}, {"test", test.coords.size()}};
  report["stop_reason"] = std::string(to_string(trace.stop_reason));
  report["initial_cost"] = trace.initial_cost;
  report["trace"] = trace_json(trace);
  report["per_rank"] = per_rank;
  report["metrics"] = {{"selected_rank", final_model.rank()},
                       {"final_corrections", final_corrections},
                       {"cost", cost(problem, final_model)},
                       {"train_rmse", rmse(final_model, train.coords, train.values)},
                       {"validation_rmse", nan_to_null(rmse(final_model, valid.coords, valid.values))},
                       {"test_rmse", rmse(final_model, test.coords, test.values)}};
  report["timing"] = {{"load_s", load_s}, {"fit_s", fit_s}, {"total_s", seconds_since(t_start)}};
  emit(f, std::move(report), trace, FactorFile{final_model, spec_u, spec_v, false}, out);
  return kSuccess;
}

// coherence -----------------------------------------------------------------

int cmd_coherence(const std::string& input, int m_min, int m_max, const std::string& out_path, std::ostream& out,
                  std::ostream& err) {
  std::ifstream in(input);
  if (!in) throw ParseError("cannot open '" + input + "'");
  const Dataset ds = read_dense_csv(in);
  // one atom per CSV row
  const Matrix columns = ds.to_dense().transpose();
  FiniteDictionary dict = FiniteDictionary::from_columns(columns, false);
  if (!dict.normalized) {
    err << "warning: dictionary atoms are not unit norm; normalizing\n";
    dict = FiniteDictionary::from_columns(columns, true);
  }
  const int n = static_cast<int>(dict.size());
  if (n < 2) throw UsageError("coherence needs at least two atoms");
  if (m_max == 0) m_max = n - 1;
  if (m_min < 1 || m_max > n - 1 || m_min > m_max) {
    throw UsageError("m range [" + std::to_string(m_min) + ", " + std::to_string(m_max) + "] outside [1, " +
                     std::to_string(n - 1) + "]");
  }
  const CoherenceProfile profile = coherence_profile(dict);
  std::ostringstream os;
  os << "m,mu,rate_bound\n";
  for (int m = m_min; m <= m_max; ++m) os << m << ',' << num(profile.at(m)) << ',' << num(profile.rate_bound(m)) << '\n';
  if (out_path.empty()) {
    out << os.str();
  } else {
    write_file_atomic(out_path, os.str());
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy structured low-rank factorization and completion", "gmp"};
  app.require_subcommand(1);

  FitFlags fact;
  std::string fact_input;
  bool use_covariance = false;
  auto* factorize = app.add_subcommand("factorize", "Structured low-rank factorization of a matrix");
  factorize->add_option("input", fact_input, "Input matrix (CSV or MatrixMarket)")->required();
  factorize->add_option("--mode", fact.mode, "svd, sparse-pca, snn-pca, nmf or sparse-nmf")->required();
  factorize->add_flag("--symmetric", fact.symmetric, "Symmetric factorization (v = u)");
  factorize->add_flag("--covariance", use_covariance, "Factorize the sample covariance of the input columns");
  add_fit_flags(factorize, fact);

  FitFlags comp;
  comp.mode = "plain";
  std::string comp_input;
  std::string split_text = "0.5,0.2,0.3";
  auto* complete = app.add_subcommand("complete", "Matrix completion with validation-based rank selection");
  complete->add_option("input", comp_input, "Rating triples or MatrixMarket coordinate file")->required();
  complete->add_option("--mode", comp.mode, "plain or sparse (right factors keep 60% of entries by default)");
  complete->add_option("--split", split_text, "Train,validation,test fractions");
  complete->add_flag("--symmetric", comp.symmetric, "Not supported for completion");
  add_fit_flags(complete, comp);

  std::string coh_input, coh_out;
  int m_min = 1, m_max = 0;
  auto* coherence = app.add_subcommand("coherence", "Cumulative coherence profile of a dictionary");
  coherence->add_option("input", coh_input, "Dictionary CSV, one atom per row")->required();
  coherence->add_option("--m-min", m_min, "Smallest m");
  coherence->add_option("--m-max", m_max, "Largest m (default n-1)");
  coherence->add_option("--out", coh_out, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  }

  try {
    if (factorize->parsed()) return cmd_factorize(fact_input, fact, use_covariance, out, err);
    if (complete->parsed()) return cmd_complete(comp_input, comp, split_text, out, err);
    return cmd_coherence(coh_input, m_min, m_max, coh_out, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputParse;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace gmp::cli
