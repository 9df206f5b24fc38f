#pragma once

#include <vector>

#include "qho/synthesis.hpp"

namespace qho {

// Equally dimensioned plant/observer with a common CCR block, a mirrored
// energy matrix (M = K) and a single nonsingular error weight S0, so the
// estimation error S0 (X - xi) evolves autonomously.
struct AutonomousObserverProblem {
  Eigen::Index n = 0;
  RealMatrix theta0;
  RealMatrix k_energy;  // positive definite
  RealMatrix s0;        // nonsingular
  RealMatrix sigma1, sigma2;
  RealMatrix pi_weight;
  double tau = 1.0;
};

void validate_problem(const AutonomousObserverProblem& prob);

/// The composite problem instance at coupling L and penalty weight lambda.
PlantObserverSystem to_system(const AutonomousObserverProblem& prob,
                              const RealMatrix& coupling, double lambda);

// Closed dynamics of the estimation error: a_hat = 2 theta_hat r_hat with
// theta_hat = 2 S0 Theta0 S0^T and r_hat = (1/2) S0^{-T} (K - L) S0^{-1}.
struct ErrorDynamics {
  RealMatrix a_hat;
  RealMatrix theta_hat;
  RealMatrix r_hat;
};

enum class TraceStatus { Completed, Stalled, AdmissibilityLost };

// Continuation record of the coupling path L_mu = mu f(mu, L_mu).
struct SynthesisTrace {
  std::vector<double> mu_grid;
  std::vector<RealMatrix> l_path;
  std::vector<double> cost_path;
  std::vector<double> error_path;
  std::vector<double> penalty_path;
  std::vector<double> residual_path;
  std::vector<bool> admissibility_path;
  TraceStatus status = TraceStatus::Completed;
  double reached_mu = 0.0;
};

/// True iff M equals K and L is symmetric (the error dynamics close).
bool structure_check(const RealMatrix& k_energy, const RealMatrix& m_energy,
                     const RealMatrix& coupling, double tol = 1e-12);

ErrorDynamics error_dynamics(const AutonomousObserverProblem& prob,
                             const RealMatrix& coupling);

/// One evaluation of the fixed-point map f in L_mu = mu f(mu, L_mu).
RealMatrix fixed_point_map(const AutonomousObserverProblem& prob, double mu,
                           const RealMatrix& coupling);

/// The weak-coupling direction L' = f(0, 0): d(L_mu)/d(mu) at mu = 0.
RealMatrix weak_coupling_direction(const AutonomousObserverProblem& prob);

/// Predictor-corrector continuation of L_mu from L_0 = 0 over `steps`
/// uniform increments to mu_max.
SynthesisTrace homotopy_solve(const AutonomousObserverProblem& prob, double mu_max,
                              int steps);

}  // namespace qho
