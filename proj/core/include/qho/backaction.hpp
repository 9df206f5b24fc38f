#pragma once

#include "qho/composite.hpp"

namespace qho {

// Vectorized small-gain decomposition of the coupled Gramian equation.
// d1/d2 collect the coupling-independent Kronecker-sum diagonal blocks,
// e1/e2 the blocks linear in the coupling matrix, delta_k = d_k^{-1} e_k and
// eps = ||delta1||_inf * ||delta2||_inf.
struct SmallGainData {
  RealMatrix d1, d2, e1, e2;
  RealMatrix delta1, delta2;
  double norm_delta1 = 0.0;
  double norm_delta2 = 0.0;
  double eps = 0.0;
};

struct FrequencyGrid {
  double omega_max = 0.0;  // 0 = choose 4x the largest dynamical frequency
  int samples = 4096;      // half log-spaced, half linear, symmetric in omega
  int refine_passes = 3;
};

struct BackactionReport {
  double eps = 0.0;
  bool smallgain_ok = false;   // eps < 1; bounds below apply only then
  double bound_p11 = 0.0;      // eps/(1-eps) ||P_*||_2
  double bound_full = 0.0;     // sqrt(1+||Delta1||^2)/(1-eps) ||Delta2|| ||P_*||_2
  double observed_p11_dev = 0.0;
  double observed_full_dev = 0.0;
  double kappa = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  // Matrix sandwich at w = m = tau/kappa: smallest eigenvalues of
  // (dev - lower) and (upper - dev); valid only when kappa < 1.
  bool sandwich_valid = false;
  double sandwich_lower_slack = 0.0;
  double sandwich_upper_slack = 0.0;
};

SmallGainData smallgain_data(const PlantObserverSystem& sys,
                             const CompositeDynamics& dyn);

/// kappa = tau sqrt(r(P1^{-1} B Re E_tau(eta eta^T) B^T)) with the observer
/// output covariance taken from the coupled Gramian.
double kappa(const PlantObserverSystem& sys);

std::pair<double, double> frequency_gains(const PlantObserverSystem& sys,
                                          const CompositeDynamics& dyn,
                                          const FrequencyGrid& grid = {});

BackactionReport deviation_bounds(const PlantObserverSystem& sys);

/// Matrix sandwich bounds for P11 - P1 at explicit parameters w and m > tau.
struct DeviationSandwich {
  RealMatrix lower;  // lower <= P11 - P1
  RealMatrix upper;  // P11 - P1 <= upper
};
DeviationSandwich deviation_sandwich(const PlantObserverSystem& sys, double w,
                                     double m);

double estimation_error_lower_bound(const PlantObserverSystem& sys);

}  // namespace qho
