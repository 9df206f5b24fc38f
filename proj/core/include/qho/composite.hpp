#pragma once

#include "qho/oscillator.hpp"

namespace qho {

// Directly coupled plant-observer problem instance.
//
// theta1/theta2 are the commutation blocks, k_energy/m_energy the plant and
// observer energy matrices, coupling the n x nu interaction block, s1/s2 the
// estimation-error weights, pi_weight the back-action penalty weight (SPD),
// lambda the penalty coefficient and tau the averaging horizon.
struct PlantObserverSystem {
  Eigen::Index n = 0;
  Eigen::Index nu = 0;
  RealMatrix theta1, theta2;
  RealMatrix k_energy, m_energy;
  RealMatrix coupling;
  RealMatrix sigma1, sigma2;
  RealMatrix s1, s2;
  RealMatrix pi_weight;
  double lambda = 1.0;
  double tau = 1.0;

  Eigen::Index order() const { return n + nu; }
  RealMatrix theta_full() const;
  RealMatrix sigma_full() const;
  RealMatrix energy_full() const;   // [[K, L], [L^T, M]]
  RealMatrix s_row() const;         // [S1, -S2]
};

/// Validates dimensions, symmetry/antisymmetry, the uncertainty relations
/// Sigma_k + i Theta_k >= 0 and pi_weight > 0. Throws on violation.
void validate_system(const PlantObserverSystem& sys);

struct CompositeDynamics {
  RealMatrix a_full;  // 2 Theta R
  RealMatrix a_tau;   // a_full - I/(2 tau)
  RealMatrix c_full;  // [[S1, -S2], [0, sqrt(lambda Pi) L]]
};

struct AdmissibilityReport {
  bool admissible = false;
  double margin = 0.0;  // 1/(2 max(0, abscissa)) - tau; +inf when abscissa <= 0
};

// The composite energy matrix is positive definite iff K > 0, M > 0 and the
// contraction norm is < 1. The contraction is the coupling block of the
// rescaled variables sqrt(K) X, sqrt(M) xi, for which the energy matrix has
// identity diagonal blocks (the rescaling itself is not materialized here).
struct PositivityReport {
  bool positive = false;
  double contraction = 0.0;  // ||K^{-1/2} L M^{-1/2}||_inf
  bool k_pd = false;
  bool m_pd = false;
  double r_min_eig = 0.0;    // min eigenvalue of the composite energy matrix
};

// Coupled Gramians and their Hamiltonian (Lie-algebra) transforms.
struct GramianSet {
  RealMatrix p_gram;     // controllability Gramian
  RealMatrix q_gram;     // observability Gramian
  RealMatrix hankelian;  // q_gram * p_gram
  RealMatrix lie_p;      // p_gram * Theta^{-1}
  RealMatrix lie_q;      // Theta * q_gram
  RealMatrix lie_d;      // [lie_q, lie_p]
};

// Residuals of the commutator form of the Gramian equations plus the
// resolvent-route cross-checks; all should vanish for admissible systems.
struct LieResiduals {
  double lie_ale_p = 0.0;
  double lie_ale_q = 0.0;
  double jacobi = 0.0;
  double resolvent_p = 0.0;
  double resolvent_q = 0.0;
};

CompositeDynamics assemble(const PlantObserverSystem& sys);

AdmissibilityReport admissibility(const PlantObserverSystem& sys,
                                  const CompositeDynamics& dyn);

PositivityReport positivity_criterion(const PlantObserverSystem& sys);

RealMatrix controllability_gramian(const PlantObserverSystem& sys,
                                   const CompositeDynamics& dyn);

RealMatrix observability_gramian(const PlantObserverSystem& sys,
                                 const CompositeDynamics& dyn);

/// Observability Gramian for an explicit source matrix in place of C^T C
/// (used where the penalty block is formed without a square root).
RealMatrix observability_gramian_from_source(const PlantObserverSystem& sys,
                                             const CompositeDynamics& dyn,
                                             const RealMatrix& source);

GramianSet gramian_set(const PlantObserverSystem& sys, const CompositeDynamics& dyn);

GramianSet gramian_set_from_source(const PlantObserverSystem& sys,
                                   const CompositeDynamics& dyn,
                                   const RealMatrix& source);

LieResiduals lie_residuals(const PlantObserverSystem& sys, const CompositeDynamics& dyn,
                           const GramianSet& g, const RealMatrix& source);

/// Uncoupled second-moment blocks P1 = (1/tau) L(A_tau, Sigma1) and
/// P2 = (1/tau) L(alpha_tau, Sigma2).
std::pair<RealMatrix, RealMatrix> uncoupled_moments(const PlantObserverSystem& sys);

}  // namespace qho
