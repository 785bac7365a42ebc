#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "robreg/csv.hpp"
#include "robreg/design.hpp"
#include "robreg/errors.hpp"
#include "robreg/inference.hpp"
#include "robreg/mm_estimator.hpp"
#include "robreg/scenario_io.hpp"
#include "robreg/sim.hpp"

namespace {

using namespace robreg;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kUnconverged = 2;

struct Options {
  std::string design;
  std::string response;
  bool header = false;
  std::string rho0 = "bisquare:1.547";
  std::string rho1 = "bisquare:4.685";
  double b = 0.5;
  std::uint64_t seed = 1;
  std::optional<int> threads;
  std::string out;
  std::string estimator = "mm";
  std::string contrast;
  double level = 0.95;
  double alpha = 0.5;
  std::string scenario;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  os << text;
  if (!os) throw ConfigError("failed writing " + path);
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

Vector parse_contrast(const std::string& text, Eigen::Index p) {
  if (text.empty()) return Vector::Unit(p, 0);
  std::istringstream in(text);
  const Matrix m = read_csv_matrix(in);
  if (m.rows() != 1 || m.cols() != p) {
    throw ConfigError("--contrast needs " + std::to_string(p) + " comma separated values");
  }
  const Vector a = m.row(0).transpose();
  if (!(a.norm() > 0.0)) throw ConfigError("--contrast must be nonzero");
  return a;
}

int cmd_fit(const Options& o) {
  const Matrix X = read_csv_matrix(o.design, o.header);
  const Matrix Y = read_csv_matrix(o.response, o.header);
  if (Y.cols() != 1) throw ConfigError("response must have exactly one column");
  if (Y.rows() != X.rows()) {
    throw ConfigError("response has " + std::to_string(Y.rows()) + " rows but design has " +
                      std::to_string(X.rows()));
  }
  const RegressionProblem problem(X, Y.col(0));

  SFitConfig s;
  s.mscale.rho0 = parse_kernel(o.rho0);
  s.mscale.b = o.b;
  s.seed = o.seed;
  s.validate();
  MMFitConfig mm;
  mm.rho1 = parse_kernel(o.rho1);
  mm.validate();

  FitResult fit;
  RhoKernel loss = s.mscale.rho0;
  if (o.estimator == "mm") {
    fit = fit_mm(problem, s, mm);
    loss = mm.rho1;
  } else if (o.estimator == "s") {
    fit = fit_s(problem, s);
  } else {
    throw ConfigError("--estimator must be s or mm");
  }

  nlohmann::json j;
  j["estimator"] = o.estimator;
  j["n"] = problem.n();
  j["p"] = problem.p();
  j["rho0"] = to_string(s.mscale.rho0);
  j["rho1"] = to_string(mm.rho1);
  j["b"] = o.b;
  j["seed"] = o.seed;
  j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["scale"] = fit.scale;
  j["objective"] = fit.objective;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["exact_fit"] = fit.exact_fit;

  const Vector a = parse_contrast(o.contrast, problem.p());
  try {
    const ContrastInference ci = contrast_inference(problem, fit, loss, a, o.level);
    j["contrast"] = {{"a", std::vector<double>(ci.a_n.data(), ci.a_n.data() + ci.a_n.size())},
                     {"r_n", ci.r_n},
                     {"estimate", ci.estimate},
                     {"std_error", ci.std_error},
                     {"ci_low", ci.ci_low},
                     {"ci_high", ci.ci_high},
                     {"level", ci.level}};
  } catch (const AssumptionViolation& e) {
    j["contrast"] = {{"error", e.what()}};
  }

  std::string json_path;
  if (!o.out.empty()) {
    json_path = o.out + ".json";
    std::ostringstream res;
    write_csv_matrix(problem.residuals(fit.beta), res);
    write_file(o.out + ".residuals.csv", res.str());
  }
  emit_json(j, json_path);
  return fit.converged ? kOk : kUnconverged;
}

int cmd_diagnose(const Options& o) {
  const Matrix X = read_csv_matrix(o.design, o.header);
  ConditionProbe probe;
  probe.seed = o.seed;
  const DesignReport report = check_conditions(X, o.b, o.alpha, probe);
  emit_json(to_json(report), o.out.empty() ? "" : o.out + ".json");
  return kOk;
}

int resolve_threads(const std::optional<int>& flag, int scenario_value) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ROBREG_THREADS"); env && *env) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("ROBREG_THREADS is not an integer: ") + env);
    }
  }
  return scenario_value;
}

std::string cell(double v) {
  std::ostringstream os;
  if (std::isfinite(v)) {
    os << std::setprecision(4) << v;
  } else {
    os << "-";
  }
  return os.str();
}

int cmd_simulate(const Options& o) {
  ScenarioConfig config = load_scenario(o.scenario);
  config.threads = resolve_threads(o.threads, config.threads);
  if (config.threads < 1) throw ConfigError("threads must be >= 1");
  const ExperimentReport report = run_experiment(config);

  const std::string prefix =
      o.out.empty() ? std::filesystem::path(o.scenario).stem().string() : o.out;
  std::ostringstream csv;
  write_csv(report, csv);
  write_file(prefix + ".csv", csv.str());
  write_file(prefix + ".json", to_json(report).dump(2) + "\n");

  std::cout << "experiment " << experiment_name(report.kind) << "  s(F0) = "
            << cell(report.scale_ref) << "\n";
  std::cout << std::left << std::setw(8) << "n" << std::setw(6) << "p" << std::setw(7)
            << "reps" << std::setw(6) << "fail" << std::setw(12) << "med_err"
            << std::setw(12) << "med_rate" << std::setw(12) << "med_scale" << std::setw(12)
            << "scale_err" << std::setw(10) << "coverage" << std::setw(10) << "z_var"
            << std::setw(10) << "qq_corr" << std::setw(12) << "ls_ratio" << "\n";
  for (const GridAggregate& g : report.aggregates) {
    std::cout << std::left << std::setw(8) << g.n << std::setw(6) << g.p << std::setw(7)
              << g.count << std::setw(6) << g.failures << std::setw(12) << cell(g.median_err)
              << std::setw(12) << cell(g.median_rate_stat) << std::setw(12)
              << cell(g.median_scale) << std::setw(12) << cell(g.median_scale_error)
              << std::setw(10) << cell(g.coverage) << std::setw(10) << cell(g.z_var)
              << std::setw(10) << cell(g.qq_corr) << std::setw(12)
              << cell(g.median_error_ratio) << "\n";
  }
  std::cout << "wrote " << prefix << ".csv and " << prefix << ".json\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robreg: robust S and MM regression"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit an S or MM regression to CSV data");
  fit->add_option("--design", o.design, "Design matrix CSV (n rows, p columns)")->required();
  fit->add_option("--response", o.response, "Response CSV (n rows, one column)")->required();
  fit->add_flag("--header", o.header, "Skip the first line of each CSV");
  fit->add_option("--rho0", o.rho0, "Scale loss, family:c")->capture_default_str();
  fit->add_option("--rho1", o.rho1, "MM loss, family:c")->capture_default_str();
  fit->add_option("--b", o.b, "M-scale level b")->capture_default_str();
  fit->add_option("--seed", o.seed, "Subsampling seed")->capture_default_str();
  fit->add_option("--estimator", o.estimator, "s or mm")->capture_default_str();
  fit->add_option("--contrast", o.contrast, "Contrast vector a, comma separated (default e1)");
  fit->add_option("--level", o.level, "Confidence level")->capture_default_str();
  fit->add_option("--threads", o.threads, "Worker cap (unused by fit)");
  fit->add_option("--out", o.out, "Output prefix for <out>.json and <out>.residuals.csv");

  auto* diagnose = app.add_subcommand("diagnose", "Check design regularity conditions");
  diagnose->add_option("--design", o.design, "Design matrix CSV")->required();
  diagnose->add_flag("--header", o.header, "Skip the first line of the CSV");
  diagnose->add_option("--alpha", o.alpha, "Subset fraction for eta_n")->capture_default_str();
  diagnose->add_option("--b", o.b, "M-scale level b")->capture_default_str();
  diagnose->add_option("--seed", o.seed, "Probe seed")->capture_default_str();
  diagnose->add_option("--out", o.out, "Output prefix for <out>.json");

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario file");
  simulate->add_option("--scenario", o.scenario, "Scenario key=value file")->required();
  simulate->add_option("--threads", o.threads, "Worker count (overrides ROBREG_THREADS)");
  simulate->add_option("--out", o.out, "Output prefix for <out>.csv and <out>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*diagnose) return cmd_diagnose(o);
    return cmd_simulate(o);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnconverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
