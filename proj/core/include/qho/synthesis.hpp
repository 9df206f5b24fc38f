#pragma once

#include "qho/composite.hpp"

namespace qho {

struct CostReport {
  double total = 0.0;       // <C^T C, P>
  double error_ms = 0.0;    // <S^T S, P>
  double penalty = 0.0;     // lambda tr(Pi L P22 L^T)
  double total_dual = 0.0;  // (1/tau) <Q, Sigma>; equals total
};

struct GradientPair {
  RealMatrix grad_l;  // 2 (lambda Pi L P22 - 2 (Theta1 E12 - E21^T Theta2))
  RealMatrix grad_m;  // -2 (Theta2 E22 - E22^T Theta2), symmetric
};

struct StationarityResidual {
  double res_l = 0.0;
  double res_m = 0.0;
  double res_lie_l = 0.0;
  double res_lie_m = 0.0;
  // Residual of the symmetric-coupling restriction (symmetric projection of
  // the L-condition); relevant for equally dimensioned mirror observers.
  double res_l_restricted = 0.0;
};

struct ObserverEnergyRecovery {
  RealMatrix m;             // symmetrized
  double symmetry_defect = 0.0;
};

struct CovarianceRelationCheck {
  double upper_residual = 0.0;  // ||Theta1 E12 - E21^T Theta2 - (lambda/2) Pi L P22||
  double lower_residual = 0.0;  // ||Theta2 E22 - E22^T Theta2||
};

struct DescentOptions {
  int max_iterations = 10000;
  double grad_tol = 1e-8;     // scaled by (1 + |cost|)
  double initial_step = 1e-3;
};

struct DescentResult {
  PlantObserverSystem sys;
  double cost = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

CostReport cost(const PlantObserverSystem& sys);

GradientPair gradients(const PlantObserverSystem& sys);

StationarityResidual stationarity(const PlantObserverSystem& sys);

/// L = (2/lambda) Pi^{-1} (Theta1 E12 - E21^T Theta2) P22^{-1}.
RealMatrix recover_coupling(const GramianSet& gramians, const PlantObserverSystem& sys);

/// Observer energy matrix from the (1,2) block of the Jacobi identity at a
/// stationary point (requires n = nu and a nondegenerate observer).
ObserverEnergyRecovery recover_observer_energy(const GramianSet& gramians,
                                               const PlantObserverSystem& sys);

CovarianceRelationCheck covariance_relation_check(const PlantObserverSystem& sys,
                                                  const GramianSet& gramians);

/// Plain gradient descent over (L, M) with step halving; experimentation
/// helper, not a solver with convergence guarantees.
DescentResult descend_cost(const PlantObserverSystem& sys, const DescentOptions& opts = {});

}  // namespace qho
