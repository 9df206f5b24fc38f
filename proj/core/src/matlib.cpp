#include "qho/matlib.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace qho {

double operator_norm(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<RealMatrix>(m).singularValues()(0);
}

double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0);
}

double spectral_radius(const RealMatrix& m) {
  Eigen::EigenSolver<RealMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw EigenFailure("spectral_radius: eigen-solver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("min_symmetric_eigenvalue: eigen-solver did not converge");
  return es.eigenvalues().minCoeff();
}

double min_hermitian_eigenvalue(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("min_hermitian_eigenvalue: eigen-solver did not converge");
  return es.eigenvalues().minCoeff();
}

RealMatrix sqrt_psd(const RealMatrix& m, double clamp_tol) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) throw EigenFailure("sqrt_psd: eigen-solver did not converge");
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  RealVector d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -clamp_tol * scale)
      throw BadWeights("sqrt_psd: matrix is not positive semi-definite");
    d(i) = std::sqrt(std::max(0.0, d(i)));
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

bool is_symmetric(const RealMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

bool is_antisymmetric(const RealMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m + m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

void ensure_finite(const RealMatrix& m, const char* context) {
  if (!m.allFinite()) throw NonFiniteResult(std::string(context) + ": non-finite entries");
}

void ensure_finite(const ComplexMatrix& m, const char* context) {
  if (!m.allFinite()) throw NonFiniteResult(std::string(context) + ": non-finite entries");
}

StabilityReport stability_report(const RealMatrix& m, double tol_hurwitz) {
  if (m.rows() != m.cols()) throw DimensionMismatch("stability_report: matrix not square");
  Eigen::EigenSolver<RealMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw EigenFailure("stability_report: eigen-solver did not converge");
  StabilityReport rep;
  rep.spectral_abscissa = es.eigenvalues().real().maxCoeff();
  rep.spectral_radius_exp = std::log(spectral_radius(matrix_exp(m)));
  rep.is_hurwitz = rep.spectral_abscissa < -tol_hurwitz;
  return rep;
}

RealMatrix kron_sum(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw DimensionMismatch("kron_sum: inputs must be square");
  const Eigen::Index na = a.rows(), nb = b.rows();
  RealMatrix out = RealMatrix::Zero(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j)
      if (a(i, j) != 0.0)
        out.block(i * nb, j * nb, nb, nb).diagonal().array() += a(i, j);
  for (Eigen::Index i = 0; i < na; ++i)
    out.block(i * nb, i * nb, nb, nb) += b;
  return out;
}

RealVector vectorize(const RealMatrix& m) {
  return Eigen::Map<const RealVector>(m.data(), m.size());
}

RealMatrix unvectorize(const RealVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw DimensionMismatch("unvectorize: length does not match rows*cols");
  return Eigen::Map<const RealMatrix>(v.data(), rows, cols);
}

RealMatrix solve_ale(const RealMatrix& alpha, const RealMatrix& beta, double tol_hurwitz) {
  if (alpha.rows() != alpha.cols()) throw DimensionMismatch("solve_ale: alpha not square");
  if (beta.rows() != alpha.rows() || beta.cols() != alpha.cols())
    throw DimensionMismatch("solve_ale: beta order differs from alpha");

  const StabilityReport st = stability_report(alpha, tol_hurwitz);
  if (!st.is_hurwitz) {
    std::ostringstream os;
    os << "solve_ale: alpha is not Hurwitz (abscissa " << st.spectral_abscissa << ")";
    throw NotHurwitz(os.str());
  }

  // vec(alpha*g + g*alpha^T) = (alpha (+) alpha) vec(g)
  RealMatrix sys = kron_sum(alpha, alpha);
  RealVector g = sys.partialPivLu().solve(-vectorize(beta));
  RealMatrix gamma = unvectorize(g, alpha.rows(), alpha.cols());
  if (is_symmetric(beta)) gamma = symmetrize(gamma);
  ensure_finite(gamma, "solve_ale");
  return gamma;
}

RealMatrix matrix_exp(const RealMatrix& m) { return m.exp(); }

}  // namespace qho
