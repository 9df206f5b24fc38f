#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace qho {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kVersionMajor = 0;
inline constexpr const char* kVersion = "0.1.0";

// Base class for all library errors; derived types mirror the error names
// of the operation contracts.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QHO_DEFINE_ERROR(Name) \
  struct Name final : Error {  \
    using Error::Error;        \
  }

QHO_DEFINE_ERROR(DimensionMismatch);
QHO_DEFINE_ERROR(NotHurwitz);
QHO_DEFINE_ERROR(EigenFailure);
QHO_DEFINE_ERROR(NonFiniteResult);
QHO_DEFINE_ERROR(BadCcr);
QHO_DEFINE_ERROR(BadEnergy);
QHO_DEFINE_ERROR(OddDimension);
QHO_DEFINE_ERROR(NotOscillatory);
QHO_DEFINE_ERROR(DegenerateEigenbasis);
QHO_DEFINE_ERROR(HorizonTooLong);
QHO_DEFINE_ERROR(AllFrequenciesZero);
QHO_DEFINE_ERROR(SearchSpaceTooLarge);
QHO_DEFINE_ERROR(BadWeights);
QHO_DEFINE_ERROR(UncoupledBlocksNotStable);
QHO_DEFINE_ERROR(SmallGainViolated);
QHO_DEFINE_ERROR(SingularP1);
QHO_DEFINE_ERROR(ResolventSingular);
QHO_DEFINE_ERROR(DegenerateP22);
QHO_DEFINE_ERROR(DegenerateP2);
QHO_DEFINE_ERROR(DegenerateD12);
QHO_DEFINE_ERROR(StructureViolated);
QHO_DEFINE_ERROR(ContinuationStalled);
QHO_DEFINE_ERROR(AdmissibilityLost);
QHO_DEFINE_ERROR(ConfigError);

#undef QHO_DEFINE_ERROR

/// Frobenius norm (written ||.||_2 throughout the library).
template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

/// Operator norm ||.||_inf: the largest singular value.
double operator_norm(const RealMatrix& m);
double operator_norm(const ComplexMatrix& m);

/// Spectral radius r(m).
double spectral_radius(const RealMatrix& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_symmetric_eigenvalue(const RealMatrix& m);

/// Smallest eigenvalue of a Hermitian matrix.
double min_hermitian_eigenvalue(const ComplexMatrix& m);

/// (m + m^T)/2.
inline RealMatrix symmetrize(const RealMatrix& m) {
  return 0.5 * (m + m.transpose());
}

/// Symmetric square root of a positive semi-definite matrix; negative
/// eigenvalues within `clamp_tol` are clamped to zero.
RealMatrix sqrt_psd(const RealMatrix& m, double clamp_tol = 1e-12);

bool is_symmetric(const RealMatrix& m, double tol = 1e-12);
bool is_antisymmetric(const RealMatrix& m, double tol = 1e-12);

/// Throws NonFiniteResult if m has a NaN/Inf entry.
void ensure_finite(const RealMatrix& m, const char* context);
void ensure_finite(const ComplexMatrix& m, const char* context);

}  // namespace qho
