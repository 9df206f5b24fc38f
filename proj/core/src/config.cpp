#include "qho/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace qho {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

RealMatrix parse_matrix(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty() || !node[0].is_array())
    fail(where, "expected a non-empty array of row arrays");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].size();
  RealMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].is_array() || node[i].size() != cols)
      fail(where, "row " + std::to_string(i + 1) + " has inconsistent length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!node[i][j].is_number())
        fail(where, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                        ") is not a number");
      m(i, j) = node[i][j].get<double>();
    }
  }
  return m;
}

int line_of_offset(const std::string& text, std::size_t byte) {
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

double ProblemConfig::lambda_value() const {
  if (lambda) return *lambda;
  if (mu) {
    if (*mu <= 0.0) throw ConfigError("weights.mu: must be positive to derive lambda");
    return 1.0 / *mu;
  }
  throw ConfigError("weights: one of lambda or mu is required");
}

QhoModel ProblemConfig::plant_model() const {
  try {
    return build_model(plant_theta, plant_k);
  } catch (const Error& e) {
    throw ConfigError(std::string("plant: ") + e.what());
  }
}

InitialMoments ProblemConfig::plant_initial_moments() const {
  try {
    return make_initial_moments(plant_model(), sigma1);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("plant.sigma1: ") + e.what());
  }
}

PlantObserverSystem ProblemConfig::system() const {
  if (is_single()) throw ConfigError("config: observer section required");
  PlantObserverSystem sys;
  sys.n = plant_theta.rows();
  sys.nu = observer_theta.rows();
  sys.theta1 = plant_theta;
  sys.theta2 = observer_theta;
  sys.k_energy = plant_k;
  sys.m_energy = observer_m;
  sys.coupling = coupling;
  sys.sigma1 = sigma1;
  sys.sigma2 = sigma2;
  sys.s1 = s1;
  sys.s2 = s2;
  sys.pi_weight = pi_weight;
  sys.lambda = lambda_value();
  sys.tau = tau;
  try {
    validate_system(sys);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sys;
}

AutonomousObserverProblem ProblemConfig::autonomous_problem() const {
  if (!is_autonomous())
    throw ConfigError(
        "config: synthesize requires a mirrored observer (theta/M = \"mirror\", "
        "weights via S0)");
  AutonomousObserverProblem prob;
  prob.n = plant_theta.rows();
  prob.theta0 = plant_theta;
  prob.k_energy = plant_k;
  prob.s0 = s1;
  prob.sigma1 = sigma1;
  prob.sigma2 = sigma2;
  prob.pi_weight = pi_weight;
  prob.tau = tau;
  try {
    validate_problem(prob);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return prob;
}

ProblemConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin + ":" + std::to_string(line_of_offset(text, e.byte)),
         "JSON syntax error: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail(origin, "top level must be an object");

  ProblemConfig cfg;

  if (!doc.contains("plant") || !doc["plant"].is_object())
    fail(origin, "missing required section plant");
  const json& plant = doc["plant"];
  if (!plant.contains("theta")) fail("plant", "missing theta");
  cfg.plant_theta = parse_matrix(plant["theta"], "plant.theta");
  if (!plant.contains("K")) fail("plant", "missing K");
  cfg.plant_k = parse_matrix(plant["K"], "plant.K");
  if (!plant.contains("sigma1")) fail("plant", "missing sigma1");
  cfg.sigma1 = parse_matrix(plant["sigma1"], "plant.sigma1");

  if (!doc.contains("horizon") || !doc["horizon"].is_object() ||
      !doc["horizon"].contains("tau") || !doc["horizon"]["tau"].is_number())
    fail(origin, "missing horizon.tau");
  cfg.tau = doc["horizon"]["tau"].get<double>();
  if (!(cfg.tau > 0.0)) fail("horizon.tau", "must be positive");

  cfg.has_observer = doc.contains("observer");
  if (cfg.has_observer) {
    const json& obs = doc["observer"];
    if (!obs.is_object()) fail("observer", "must be an object");
    if (!obs.contains("theta")) fail("observer", "missing theta");
    if (obs["theta"].is_string() && obs["theta"].get<std::string>() == "mirror") {
      cfg.observer_theta_mirror = true;
      cfg.observer_theta = cfg.plant_theta;
    } else {
      cfg.observer_theta = parse_matrix(obs["theta"], "observer.theta");
    }
    if (!obs.contains("M")) fail("observer", "missing M");
    if (obs["M"].is_string() && obs["M"].get<std::string>() == "mirror") {
      cfg.observer_m_mirror = true;
      cfg.observer_m = cfg.plant_k;
    } else {
      cfg.observer_m = parse_matrix(obs["M"], "observer.M");
    }
    if (!obs.contains("sigma2")) fail("observer", "missing sigma2");
    cfg.sigma2 = parse_matrix(obs["sigma2"], "observer.sigma2");

    const Eigen::Index n = cfg.plant_theta.rows();
    const Eigen::Index nu = cfg.observer_theta.rows();

    if (!doc.contains("coupling") || !doc["coupling"].is_object() ||
        !doc["coupling"].contains("L"))
      fail(origin, "missing coupling.L");
    const json& lnode = doc["coupling"]["L"];
    if (lnode.is_string() && lnode.get<std::string>() == "zero")
      cfg.coupling = RealMatrix::Zero(n, nu);
    else
      cfg.coupling = parse_matrix(lnode, "coupling.L");

    if (!doc.contains("weights") || !doc["weights"].is_object())
      fail(origin, "missing weights section");
    const json& w = doc["weights"];
    if (w.contains("S0")) {
      cfg.weights_mirrored = true;
      cfg.s1 = parse_matrix(w["S0"], "weights.S0");
      cfg.s2 = cfg.s1;
    } else {
      if (!w.contains("S1") || !w.contains("S2"))
        fail("weights", "need S0 or both S1 and S2");
      cfg.s1 = parse_matrix(w["S1"], "weights.S1");
      cfg.s2 = parse_matrix(w["S2"], "weights.S2");
    }
    if (!w.contains("Pi")) fail("weights", "missing Pi");
    cfg.pi_weight = parse_matrix(w["Pi"], "weights.Pi");
    if (w.contains("lambda")) {
      cfg.lambda = w["lambda"].get<double>();
      if (*cfg.lambda <= 0.0) fail("weights.lambda", "must be positive");
    }
    if (w.contains("mu")) {
      cfg.mu = w["mu"].get<double>();
      if (*cfg.mu < 0.0) fail("weights.mu", "must be nonnegative");
    }
  }

  cfg.echo = doc.dump();

  // Structural validation happens here so broken documents never reach the
  // numeric layer.
  if (cfg.is_single()) {
    cfg.plant_initial_moments();
  } else if (cfg.is_autonomous()) {
    cfg.autonomous_problem();
    if (cfg.lambda || cfg.mu) {
      if (cfg.mu && *cfg.mu == 0.0 && !cfg.lambda) {
        // mu = 0 marks the uncoupled start; nothing further to check.
      } else {
        cfg.system();
      }
    }
  } else {
    cfg.system();
  }
  return cfg;
}

std::string render_fixture_config(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  json doc;
  if (lower == "ex1") {
    const fixtures::SingleOscillator fx = fixtures::ex1();
    doc["plant"] = {{"theta", matrix_to_json(fx.theta)},
                    {"K", matrix_to_json(fx.energy)},
                    {"sigma1", matrix_to_json(fx.sigma)}};
    doc["horizon"] = {{"tau", fx.tau}};
  } else if (lower == "ex2") {
    const AutonomousObserverProblem prob = fixtures::ex2();
    doc["plant"] = {{"theta", matrix_to_json(prob.theta0)},
                    {"K", matrix_to_json(prob.k_energy)},
                    {"sigma1", matrix_to_json(prob.sigma1)}};
    doc["observer"] = {{"theta", "mirror"},
                       {"M", "mirror"},
                       {"sigma2", matrix_to_json(prob.sigma2)}};
    doc["coupling"] = {{"L", "zero"}};
    doc["weights"] = {{"S0", matrix_to_json(prob.s0)},
                      {"Pi", matrix_to_json(prob.pi_weight)},
                      {"mu", 0.0}};
    doc["horizon"] = {{"tau", prob.tau}};
  } else {
    throw ConfigError("unknown fixture: " + name + " (available: ex1, ex2)");
  }
  return doc.dump(2) + "\n";
}

ProblemConfig load_config(const std::string& path_or_fixture) {
  std::string lower = path_or_fixture;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ex1" || lower == "ex2")
    return parse_config(render_fixture_config(lower), "fixture:" + lower);

  std::ifstream in(path_or_fixture, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path_or_fixture);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path_or_fixture);
}

}  // namespace qho
