#include "qho/composite.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <limits>

namespace qho {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

RealMatrix commutator(const RealMatrix& x, const RealMatrix& y) {
  return x * y - y * x;
}
}  // namespace

RealMatrix PlantObserverSystem::theta_full() const {
  RealMatrix t = RealMatrix::Zero(order(), order());
  t.topLeftCorner(n, n) = theta1;
  t.bottomRightCorner(nu, nu) = theta2;
  return t;
}

RealMatrix PlantObserverSystem::sigma_full() const {
  RealMatrix s = RealMatrix::Zero(order(), order());
  s.topLeftCorner(n, n) = sigma1;
  s.bottomRightCorner(nu, nu) = sigma2;
  return s;
}

RealMatrix PlantObserverSystem::energy_full() const {
  RealMatrix r(order(), order());
  r.topLeftCorner(n, n) = k_energy;
  r.topRightCorner(n, nu) = coupling;
  r.bottomLeftCorner(nu, n) = coupling.transpose();
  r.bottomRightCorner(nu, nu) = m_energy;
  return r;
}

RealMatrix PlantObserverSystem::s_row() const {
  RealMatrix s(s1.rows(), order());
  s.leftCols(n) = s1;
  s.rightCols(nu) = -s2;
  return s;
}

void validate_system(const PlantObserverSystem& sys) {
  if (sys.n <= 0 || sys.nu <= 0 || sys.n % 2 != 0 || sys.nu % 2 != 0)
    throw OddDimension("system: plant/observer orders must be positive even");
  auto square = [](const RealMatrix& m, Eigen::Index k) {
    return m.rows() == k && m.cols() == k;
  };
  if (!square(sys.theta1, sys.n) || !square(sys.theta2, sys.nu) ||
      !square(sys.k_energy, sys.n) || !square(sys.m_energy, sys.nu) ||
      !square(sys.sigma1, sys.n) || !square(sys.sigma2, sys.nu) ||
      !square(sys.pi_weight, sys.n) || sys.coupling.rows() != sys.n ||
      sys.coupling.cols() != sys.nu)
    throw DimensionMismatch("system: block dimensions are inconsistent");
  if (sys.s1.cols() != sys.n || sys.s2.cols() != sys.nu || sys.s1.rows() != sys.s2.rows())
    throw DimensionMismatch("system: estimation weights S1/S2 are inconsistent");
  if (!is_antisymmetric(sys.theta1) || !is_antisymmetric(sys.theta2))
    throw BadCcr("system: theta blocks must be antisymmetric");
  if (!Eigen::FullPivLU<RealMatrix>(sys.theta1).isInvertible() ||
      !Eigen::FullPivLU<RealMatrix>(sys.theta2).isInvertible())
    throw BadCcr("system: theta blocks must be nonsingular");
  if (!is_symmetric(sys.k_energy) || !is_symmetric(sys.m_energy))
    throw BadEnergy("system: energy blocks must be symmetric");
  if (!is_symmetric(sys.sigma1) || !is_symmetric(sys.sigma2))
    throw BadEnergy("system: sigma blocks must be symmetric");
  if (!is_symmetric(sys.pi_weight) || min_symmetric_eigenvalue(sys.pi_weight) <= 0.0)
    throw BadWeights("system: pi_weight must be symmetric positive definite");
  if (!(sys.lambda > 0.0)) throw BadWeights("system: lambda must be positive");
  if (!(sys.tau > 0.0)) throw HorizonTooLong("system: tau must be positive");

  auto check_uncertainty = [](const RealMatrix& sigma, const RealMatrix& theta,
                              const char* which) {
    ComplexMatrix g = sigma.cast<std::complex<double>>() +
                      std::complex<double>(0, 1) * theta.cast<std::complex<double>>();
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if (min_hermitian_eigenvalue(g) < -1e-9 * scale)
      throw BadCcr(std::string("system: ") + which + " violates sigma + i*theta >= 0");
  };
  check_uncertainty(sys.sigma1, sys.theta1, "sigma1");
  check_uncertainty(sys.sigma2, sys.theta2, "sigma2");
}

CompositeDynamics assemble(const PlantObserverSystem& sys) {
  validate_system(sys);
  CompositeDynamics dyn;
  dyn.a_full = 2.0 * sys.theta_full() * sys.energy_full();
  dyn.a_tau = dyn.a_full -
              RealMatrix::Identity(sys.order(), sys.order()) / (2.0 * sys.tau);

  const Eigen::Index p = sys.s1.rows();
  dyn.c_full = RealMatrix::Zero(p + sys.n, sys.order());
  dyn.c_full.topRows(p) = sys.s_row();
  dyn.c_full.bottomRightCorner(sys.n, sys.nu) =
      sqrt_psd(sys.lambda * sys.pi_weight) * sys.coupling;
  return dyn;
}

AdmissibilityReport admissibility(const PlantObserverSystem& sys,
                                  const CompositeDynamics& dyn) {
  const double limit = horizon_limit(dyn.a_full);
  AdmissibilityReport rep;
  rep.margin = limit == kInf ? kInf : limit - sys.tau;
  rep.admissible = rep.margin > 0.0;
  return rep;
}

PositivityReport positivity_criterion(const PlantObserverSystem& sys) {
  PositivityReport rep;
  rep.k_pd = min_symmetric_eigenvalue(sys.k_energy) > 0.0;
  rep.m_pd = min_symmetric_eigenvalue(sys.m_energy) > 0.0;
  rep.r_min_eig = min_symmetric_eigenvalue(sys.energy_full());
  if (rep.k_pd && rep.m_pd) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> ek(sys.k_energy), em(sys.m_energy);
    const RealMatrix k_inv_sqrt = ek.operatorInverseSqrt();
    const RealMatrix m_inv_sqrt = em.operatorInverseSqrt();
    rep.contraction = operator_norm(RealMatrix(k_inv_sqrt * sys.coupling * m_inv_sqrt));
  } else {
    rep.contraction = kInf;
  }
  rep.positive = rep.k_pd && rep.m_pd && rep.contraction < 1.0;
  return rep;
}

namespace {

void require_admissible(const PlantObserverSystem& sys, const CompositeDynamics& dyn,
                        const char* op) {
  const AdmissibilityReport rep = admissibility(sys, dyn);
  if (!rep.admissible)
    throw HorizonTooLong(std::string(op) + ": observer is not tau-admissible");
}

}  // namespace

RealMatrix controllability_gramian(const PlantObserverSystem& sys,
                                   const CompositeDynamics& dyn) {
  require_admissible(sys, dyn, "controllability_gramian");
  return solve_ale(dyn.a_tau, sys.sigma_full() / sys.tau);
}

RealMatrix observability_gramian(const PlantObserverSystem& sys,
                                 const CompositeDynamics& dyn) {
  return observability_gramian_from_source(
      sys, dyn, dyn.c_full.transpose() * dyn.c_full);
}

RealMatrix observability_gramian_from_source(const PlantObserverSystem& sys,
                                             const CompositeDynamics& dyn,
                                             const RealMatrix& source) {
  require_admissible(sys, dyn, "observability_gramian");
  return solve_ale(dyn.a_tau.transpose(), source);
}

GramianSet gramian_set(const PlantObserverSystem& sys, const CompositeDynamics& dyn) {
  return gramian_set_from_source(sys, dyn, dyn.c_full.transpose() * dyn.c_full);
}

GramianSet gramian_set_from_source(const PlantObserverSystem& sys,
                                   const CompositeDynamics& dyn,
                                   const RealMatrix& source) {
  GramianSet g;
  g.p_gram = controllability_gramian(sys, dyn);
  g.q_gram = observability_gramian_from_source(sys, dyn, source);
  g.hankelian = g.q_gram * g.p_gram;
  const RealMatrix theta = sys.theta_full();
  const RealMatrix theta_inv = theta.partialPivLu().inverse();
  g.lie_p = g.p_gram * theta_inv;
  g.lie_q = theta * g.q_gram;
  g.lie_d = commutator(g.lie_q, g.lie_p);
  return g;
}

LieResiduals lie_residuals(const PlantObserverSystem& sys, const CompositeDynamics& dyn,
                           const GramianSet& g, const RealMatrix& source) {
  const Eigen::Index m = sys.order();
  const RealMatrix theta = sys.theta_full();
  const RealMatrix theta_inv = theta.partialPivLu().inverse();
  const RealMatrix sig_ti = sys.sigma_full() * theta_inv;
  const RealMatrix theta_src = theta * source;
  const double tau = sys.tau;

  LieResiduals r;
  r.lie_ale_p = frobenius_norm(commutator(dyn.a_full, g.lie_p) -
                               (g.lie_p - sig_ti) / tau);
  r.lie_ale_q =
      frobenius_norm(commutator(dyn.a_full, g.lie_q) - (theta_src - g.lie_q / tau));
  r.jacobi = frobenius_norm(commutator(sig_ti, g.lie_q) / tau +
                            commutator(theta_src, g.lie_p) +
                            commutator(g.lie_d, dyn.a_full));

  // Resolvent route: ad_A materialized on the full m^2-dimensional space.
  const RealMatrix id_m = RealMatrix::Identity(m, m);
  const RealMatrix ad =
      Eigen::kroneckerProduct(id_m, dyn.a_full) -
      Eigen::kroneckerProduct(dyn.a_full.transpose(), id_m);
  const RealMatrix big_id = RealMatrix::Identity(m * m, m * m);
  const RealVector p_vec =
      (big_id - tau * ad).partialPivLu().solve(vectorize(sig_ti));
  const RealVector q_vec =
      tau * (big_id + tau * ad).partialPivLu().solve(vectorize(theta_src));
  r.resolvent_p = frobenius_norm(unvectorize(p_vec, m, m) - g.lie_p);
  r.resolvent_q = frobenius_norm(unvectorize(q_vec, m, m) - g.lie_q);
  return r;
}

std::pair<RealMatrix, RealMatrix> uncoupled_moments(const PlantObserverSystem& sys) {
  const RealMatrix a_tau = 2.0 * sys.theta1 * sys.k_energy -
                           RealMatrix::Identity(sys.n, sys.n) / (2.0 * sys.tau);
  const RealMatrix alpha_tau = 2.0 * sys.theta2 * sys.m_energy -
                               RealMatrix::Identity(sys.nu, sys.nu) / (2.0 * sys.tau);
  return {solve_ale(a_tau, sys.sigma1 / sys.tau),
          solve_ale(alpha_tau, sys.sigma2 / sys.tau)};
}

}  // namespace qho
