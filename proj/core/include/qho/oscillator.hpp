#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "qho/matlib.hpp"

namespace qho {

// A single closed oscillator at the covariance level.
//
// theta is the antisymmetric nonsingular commutation matrix, energy the
// symmetric Hamiltonian matrix, and dynamics = 2*theta*energy, which is
// Hamiltonian: dynamics*theta + theta*dynamics^T = 0.
struct QhoModel {
  Eigen::Index n = 0;
  RealMatrix theta;
  RealMatrix energy;
  RealMatrix dynamics;
};

// Eigen-structure of the dynamics matrix A = i V Omega W, W = V^{-1}.
//
// Frequencies are ordered so the first n/2 are >= 0 descending and
// omega[k + n/2] = -omega[k]; columns of v pair as conjugates accordingly,
// making the rank-one matrices c[k] = V_k W_k satisfy conj(c[k]) = c[k+n/2]
// and sum_k c[k] = I.
struct SpectralData {
  ComplexMatrix v;
  ComplexMatrix w;
  RealVector omega;
  std::vector<ComplexMatrix> c;
};

// Initial second moments: sigma = Re E(X0 X0^T), gamma = sigma + i*theta.
struct InitialMoments {
  RealMatrix sigma;
  ComplexMatrix gamma;
};

// Discounted second moments at horizon tau (tau = +inf marks the
// infinite-horizon average). `full` = p_real + i*theta.
struct DiscountedMoments {
  double tau = 0.0;
  RealMatrix p_real;
  ComplexMatrix full;
};

struct IncommensurabilityResult {
  bool incommensurable = false;
  std::vector<long> witness;  // empty when incommensurable
};

inline constexpr double kSpectrumRealTol = 1e-8;
inline constexpr double kEigenbasisCondLimit = 1e12;

/// Relative tolerance scale for frequency-equality tests.
inline double freq_tol(const RealVector& omega) {
  return 1e-8 * std::max(1e-300, omega.cwiseAbs().maxCoeff());
}

QhoModel build_model(const RealMatrix& theta, const RealMatrix& energy);

InitialMoments make_initial_moments(const QhoModel& model, const RealMatrix& sigma,
                                    double uncertainty_tol = 1e-9);

SpectralData spectral_decompose(const QhoModel& model);

/// Largest admissible-horizon bound 1/(2 max(0, ln r(e^A))) (+inf when the
/// spectrum has no real part).
double horizon_limit(const RealMatrix& dynamics);

DiscountedMoments discounted_moments_ale(const QhoModel& model,
                                         const InitialMoments& init, double tau);

DiscountedMoments discounted_moments_spectral(const SpectralData& spec,
                                              const InitialMoments& init,
                                              double tau);

DiscountedMoments infinite_horizon_moments(const SpectralData& spec,
                                           const InitialMoments& init);

/// Infinite-horizon average of X^T pi_weight X for pairwise-distinct
/// positive frequencies.
double quadratic_form_average(const SpectralData& spec, const InitialMoments& init,
                              const RealMatrix& pi_weight);

/// tau_* = 1 / min({|omega_j +- omega_k|} \ {0}) over the positive
/// frequencies.
double convergence_margin(const SpectralData& spec);

/// Exhaustive search for an integer relation sum_k lambda_k omega_k = 0 with
/// |lambda_k| <= max_coeff over the given positive frequencies.
IncommensurabilityResult incommensurability_diagnostic(const RealVector& omega,
                                                       long max_coeff);

}  // namespace qho
