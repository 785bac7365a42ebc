#include "robreg/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "robreg/errors.hpp"

namespace robreg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(std::string_view(s).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("out of range: '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

// "name:a,b,c" -> (name, [a, b, c])
std::pair<std::string, std::vector<double>> tagged(const std::string& s) {
  const std::size_t colon = s.find(':');
  std::pair<std::string, std::vector<double>> out;
  out.first = trim(std::string_view(s).substr(0, colon));
  if (colon != std::string::npos) {
    for (const std::string& part : split(s.substr(colon + 1), ',')) out.second.push_back(to_double(part));
  }
  return out;
}

void expect_args(const std::pair<std::string, std::vector<double>>& t, std::size_t count) {
  if (t.second.size() != count) {
    throw ConfigError("'" + t.first + "' takes " + std::to_string(count) + " parameter(s)");
  }
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment",
       [](ScenarioConfig& c, const std::string& v) {
         static const std::map<std::string, ExperimentKind> names = {
             {"rate", ExperimentKind::Rate},
             {"normality", ExperimentKind::Normality},
             {"scale", ExperimentKind::ScaleConsistency},
             {"breakdown", ExperimentKind::Breakdown},
             {"uniform", ExperimentKind::UniformConvergence}};
         const auto it = names.find(v);
         if (it == names.end()) throw ConfigError("unknown experiment '" + v + "'");
         c.experiment = it->second;
       }},
      {"n_grid",
       [](ScenarioConfig& c, const std::string& v) {
         c.n_grid.clear();
         for (const std::string& part : split(v, ',')) c.n_grid.push_back(to_int(part));
       }},
      {"dim_rule",
       [](ScenarioConfig& c, const std::string& v) {
         const auto t = tagged(v);
         expect_args(t, 1);
         if (t.first == "fixed") {
           c.dim_rule.kind = DimRule::Kind::Fixed;
         } else if (t.first == "power") {
           c.dim_rule.kind = DimRule::Kind::Power;
         } else if (t.first == "log") {
           c.dim_rule.kind = DimRule::Kind::Log;
         } else {
           throw ConfigError("unknown dim_rule '" + t.first + "'");
         }
         c.dim_rule.value = t.second[0];
       }},
      {"design",
       [](ScenarioConfig& c, const std::string& v) {
         const auto t = tagged(v);
         if (t.first == "gaussian") {
           expect_args(t, 0);
           c.design_law.kind = DesignLaw::Kind::GaussianIdentity;
         } else if (t.first == "toeplitz") {
           expect_args(t, 1);
           c.design_law.kind = DesignLaw::Kind::GaussianToeplitz;
           c.design_law.toeplitz_r = t.second[0];
         } else if (t.first == "mixture") {
           expect_args(t, 0);
           c.design_law.kind = DesignLaw::Kind::ScaleMixture;
         } else {
           throw ConfigError("unknown design '" + t.first + "'");
         }
       }},
      {"errors",
       [](ScenarioConfig& c, const std::string& v) {
         const auto t = tagged(v);
         if (t.first == "gaussian") {
           expect_args(t, 1);
           c.error_law = ErrorLaw::gaussian(t.second[0]);
         } else if (t.first == "cauchy") {
           expect_args(t, 1);
           c.error_law = ErrorLaw::cauchy(t.second[0]);
         } else if (t.first == "contaminated") {
           expect_args(t, 3);
           c.error_law = ErrorLaw::contaminated_gaussian(t.second[0], t.second[1], t.second[2]);
         } else {
           throw ConfigError("unknown error law '" + t.first + "'");
         }
       }},
      {"beta0",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "zero") {
           c.beta0_rule = Beta0Rule::Zero;
         } else if (v == "unit_spread") {
           c.beta0_rule = Beta0Rule::UnitNormSpread;
         } else {
           throw ConfigError("unknown beta0 rule '" + v + "'");
         }
       }},
      {"contamination",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "none") {
           c.contamination.reset();
           return;
         }
         const auto t = tagged(v);
         Contamination k;
         if (t.first == "vertical") {
           expect_args(t, 2);
           k.scheme = Contamination::Scheme::Vertical;
           k.fraction = t.second[0];
           k.k_y = t.second[1];
         } else if (t.first == "bad_leverage") {
           expect_args(t, 3);
           k.scheme = Contamination::Scheme::BadLeverage;
           k.fraction = t.second[0];
           k.k_x = t.second[1];
           k.k_y = t.second[2];
         } else {
           throw ConfigError("unknown contamination '" + t.first + "'");
         }
         c.contamination = k;
       }},
      {"replications", [](ScenarioConfig& c, const std::string& v) { c.replications = to_int(v); }},
      {"seed",
       [](ScenarioConfig& c, const std::string& v) {
         const long long s = to_integer(v);
         if (s < 0) throw ConfigError("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"estimator",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "s") {
           c.estimator = EstimatorKind::S;
         } else if (v == "mm") {
           c.estimator = EstimatorKind::MM;
         } else if (v == "ls") {
           c.estimator = EstimatorKind::LeastSquares;
         } else {
           throw ConfigError("unknown estimator '" + v + "'");
         }
       }},
      {"rho0", [](ScenarioConfig& c, const std::string& v) { c.mscale.rho0 = parse_kernel(v); }},
      {"rho1", [](ScenarioConfig& c, const std::string& v) { c.rho1 = parse_kernel(v); }},
      {"b", [](ScenarioConfig& c, const std::string& v) { c.mscale.b = to_double(v); }},
      {"a_rule",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "first") {
           c.a_rule = ContrastRule::FirstCoordinate;
         } else if (v == "random") {
           c.a_rule = ContrastRule::RandomUnit;
         } else {
           throw ConfigError("unknown a_rule '" + v + "'");
         }
       }},
      {"level", [](ScenarioConfig& c, const std::string& v) { c.level = to_double(v); }},
      {"n_subsamples", [](ScenarioConfig& c, const std::string& v) { c.n_subsamples = to_int(v); }},
      {"n_keep", [](ScenarioConfig& c, const std::string& v) { c.n_keep = to_int(v); }},
      {"n_concentration",
       [](ScenarioConfig& c, const std::string& v) { c.n_concentration = to_int(v); }},
      {"probes", [](ScenarioConfig& c, const std::string& v) { c.probes = to_int(v); }},
      {"threads", [](ScenarioConfig& c, const std::string& v) { c.threads = to_int(v); }},
      {"record_timing", [](ScenarioConfig& c, const std::string& v) { c.record_timing = to_bool(v); }},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig config;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back("duplicate key '" + key + "'");
      continue;
    }
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      problems.push_back("key '" + key + "': " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid scenario:\n  ") + e.what());
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  return parse_scenario(in);
}

}  // namespace robreg
