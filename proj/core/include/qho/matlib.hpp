#pragma once

#include "qho/matrix.hpp"

namespace qho {

inline constexpr double kHurwitzTol = 1e-10;

struct StabilityReport {
  double spectral_abscissa = 0.0;   // max Re(eig)
  double spectral_radius_exp = 0.0; // ln r(e^m); equals the abscissa
  bool is_hurwitz = false;
};

/// Eigenvalue stability summary of a square matrix. `tol_hurwitz` is the
/// margin below zero the abscissa must clear for is_hurwitz.
StabilityReport stability_report(const RealMatrix& m,
                                 double tol_hurwitz = kHurwitzTol);

/// Solves the algebraic Lyapunov equation alpha*g + g*alpha^T + beta = 0
/// for Hurwitz alpha via the vectorized Kronecker linear system.
/// If beta is symmetric the result is symmetrized before return.
RealMatrix solve_ale(const RealMatrix& alpha, const RealMatrix& beta,
                     double tol_hurwitz = kHurwitzTol);

/// a (+) b = a ox I + I ox b.
RealMatrix kron_sum(const RealMatrix& a, const RealMatrix& b);

/// Column-stacking vectorization and its inverse.
RealVector vectorize(const RealMatrix& m);
RealMatrix unvectorize(const RealVector& v, Eigen::Index rows,
                       Eigen::Index cols);

/// Matrix exponential (scaling-and-squaring).
RealMatrix matrix_exp(const RealMatrix& m);

}  // namespace qho
