#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qho/autonomous.hpp"
#include "qho/fixtures.hpp"

namespace qho {

// Parsed problem document. Sections: plant (theta, K, sigma1), observer
// (theta, M - either matrices or "mirror", sigma2), coupling (L or "zero"),
// weights (S1/S2 or S0, Pi, lambda or mu), horizon (tau). A config with only
// plant + horizon describes a single oscillator.
struct ProblemConfig {
  RealMatrix plant_theta;
  RealMatrix plant_k;
  RealMatrix sigma1;

  bool has_observer = false;
  bool observer_theta_mirror = false;
  bool observer_m_mirror = false;
  RealMatrix observer_theta;
  RealMatrix observer_m;
  RealMatrix sigma2;

  RealMatrix coupling;  // zero matrix when "zero"

  bool weights_mirrored = false;  // S0 form
  RealMatrix s1, s2;
  RealMatrix pi_weight;
  std::optional<double> lambda;
  std::optional<double> mu;

  double tau = 1.0;

  std::string echo;  // canonical single-line serialization for the manifest

  bool is_single() const { return !has_observer; }
  bool is_autonomous() const {
    return has_observer && observer_theta_mirror && observer_m_mirror &&
           weights_mirrored;
  }
  double lambda_value() const;  // from lambda or 1/mu

  QhoModel plant_model() const;
  InitialMoments plant_initial_moments() const;
  PlantObserverSystem system() const;
  AutonomousObserverProblem autonomous_problem() const;
};

/// Parses a JSON document; `origin` names the source in error messages.
ProblemConfig parse_config(const std::string& text, const std::string& origin);

/// Loads from a path, or resolves the bundled fixture names "ex1"/"ex2"
/// (case-insensitive).
ProblemConfig load_config(const std::string& path_or_fixture);

std::string render_fixture_config(const std::string& name);  // "ex1" or "ex2"

}  // namespace qho
