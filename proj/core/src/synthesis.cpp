#include "qho/synthesis.hpp"

#include <Eigen/LU>

#include <cmath>

namespace qho {

namespace {

RealMatrix commutator(const RealMatrix& x, const RealMatrix& y) {
  return x * y - y * x;
}

struct Blocks {
  RealMatrix p, q, e;  // Gramians and Hankelian
};

Blocks gramian_blocks(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  Blocks b;
  b.p = controllability_gramian(sys, dyn);
  b.q = observability_gramian(sys, dyn);
  b.e = b.q * b.p;
  return b;
}

}  // namespace

CostReport cost(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  const RealMatrix p = controllability_gramian(sys, dyn);
  const RealMatrix q = observability_gramian(sys, dyn);
  const RealMatrix ctc = dyn.c_full.transpose() * dyn.c_full;
  const RealMatrix s = sys.s_row();

  CostReport rep;
  rep.total = (ctc * p).trace();
  rep.error_ms = (s.transpose() * s * p).trace();
  rep.penalty = sys.lambda * (sys.pi_weight * sys.coupling *
                              p.bottomRightCorner(sys.nu, sys.nu) *
                              sys.coupling.transpose())
                                 .trace();
  rep.total_dual = (q * sys.sigma_full()).trace() / sys.tau;
  return rep;
}

GradientPair gradients(const PlantObserverSystem& sys) {
  const Blocks b = gramian_blocks(sys);
  const Eigen::Index n = sys.n, nu = sys.nu;
  const RealMatrix e12 = b.e.topRightCorner(n, nu);
  const RealMatrix e21 = b.e.bottomLeftCorner(nu, n);
  const RealMatrix e22 = b.e.bottomRightCorner(nu, nu);
  const RealMatrix p22 = b.p.bottomRightCorner(nu, nu);

  GradientPair g;
  g.grad_l = 2.0 * (sys.lambda * sys.pi_weight * sys.coupling * p22 -
                    2.0 * (sys.theta1 * e12 - e21.transpose() * sys.theta2));
  g.grad_m = -2.0 * (sys.theta2 * e22 - e22.transpose() * sys.theta2);
  return g;
}

StationarityResidual stationarity(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  const GramianSet g = gramian_set(sys, dyn);
  const Eigen::Index n = sys.n, nu = sys.nu;
  const RealMatrix e12 = g.hankelian.topRightCorner(n, nu);
  const RealMatrix e21 = g.hankelian.bottomLeftCorner(nu, n);
  const RealMatrix e22 = g.hankelian.bottomRightCorner(nu, nu);
  const RealMatrix p22 = g.p_gram.bottomRightCorner(nu, nu);
  const RealMatrix lie_p22 = g.lie_p.bottomRightCorner(nu, nu);
  const double half_lambda = 0.5 * sys.lambda;

  StationarityResidual r;
  const RealMatrix l_cond = sys.theta1 * e12 - e21.transpose() * sys.theta2 -
                            half_lambda * sys.pi_weight * sys.coupling * p22;
  r.res_l = frobenius_norm(l_cond);
  r.res_m = frobenius_norm(RealMatrix(sys.theta2 * e22 - e22.transpose() * sys.theta2));
  r.res_lie_l = frobenius_norm(
      RealMatrix(g.lie_d.topRightCorner(n, nu) -
                 half_lambda * sys.pi_weight * sys.coupling * lie_p22));
  r.res_lie_m = frobenius_norm(RealMatrix(g.lie_d.bottomRightCorner(nu, nu)));
  r.res_l_restricted = frobenius_norm(symmetrize(l_cond));
  return r;
}

RealMatrix recover_coupling(const GramianSet& gramians, const PlantObserverSystem& sys) {
  const Eigen::Index n = sys.n, nu = sys.nu;
  const RealMatrix p22 = gramians.p_gram.bottomRightCorner(nu, nu);
  if (min_symmetric_eigenvalue(p22) <= 1e-10 * std::max(1.0, p22.cwiseAbs().maxCoeff()))
    throw DegenerateP22("recover_coupling: P22 is not positive definite");
  const RealMatrix e12 = gramians.hankelian.topRightCorner(n, nu);
  const RealMatrix e21 = gramians.hankelian.bottomLeftCorner(nu, n);
  const RealMatrix num = sys.theta1 * e12 - e21.transpose() * sys.theta2;
  return (2.0 / sys.lambda) * sys.pi_weight.partialPivLu().solve(
             RealMatrix(num * p22.partialPivLu().inverse()));
}

ObserverEnergyRecovery recover_observer_energy(const GramianSet& gramians,
                                               const PlantObserverSystem& sys) {
  if (sys.n != sys.nu)
    throw DimensionMismatch("recover_observer_energy: requires n = nu");
  const Eigen::Index n = sys.n;
  const RealMatrix p22 = gramians.p_gram.bottomRightCorner(n, n);
  if (min_symmetric_eigenvalue(p22) <= 1e-10 * std::max(1.0, p22.cwiseAbs().maxCoeff()))
    throw DegenerateP22("recover_observer_energy: P22 is not positive definite");
  const RealMatrix d12 = gramians.lie_d.topRightCorner(n, n);
  const double det = std::abs(d12.determinant());
  const double scale = std::pow(std::max(frobenius_norm(d12), 1e-300), double(n));
  if (det <= 1e-10 * scale)
    throw DegenerateD12("recover_observer_energy: D12 is singular");

  const CompositeDynamics dyn = assemble(sys);
  const RealMatrix theta = sys.theta_full();
  const RealMatrix theta_inv = theta.partialPivLu().inverse();
  const RealMatrix ctc = dyn.c_full.transpose() * dyn.c_full;
  const RealMatrix jacobi12 =
      (commutator(sys.sigma_full() * theta_inv, gramians.lie_q) / sys.tau +
       commutator(theta * ctc, gramians.lie_p))
          .topRightCorner(n, n);
  const RealMatrix d11 = gramians.lie_d.topLeftCorner(n, n);
  const RealMatrix rhs = sys.theta1 * sys.k_energy * d12 -
                         d11 * sys.theta1 * sys.coupling - 0.5 * jacobi12;
  const RealMatrix m_raw =
      sys.theta2.partialPivLu().solve(RealMatrix(d12.partialPivLu().solve(rhs)));

  ObserverEnergyRecovery out;
  out.symmetry_defect = frobenius_norm(RealMatrix(m_raw - m_raw.transpose()));
  out.m = symmetrize(m_raw);
  return out;
}

CovarianceRelationCheck covariance_relation_check(const PlantObserverSystem& sys,
                                                  const GramianSet& gramians) {
  const Eigen::Index n = sys.n, nu = sys.nu;
  const RealMatrix e12 = gramians.hankelian.topRightCorner(n, nu);
  const RealMatrix e21 = gramians.hankelian.bottomLeftCorner(nu, n);
  const RealMatrix e22 = gramians.hankelian.bottomRightCorner(nu, nu);
  const RealMatrix p22 = gramians.p_gram.bottomRightCorner(nu, nu);

  CovarianceRelationCheck out;
  out.upper_residual =
      frobenius_norm(RealMatrix(sys.theta1 * e12 - e21.transpose() * sys.theta2 -
                                0.5 * sys.lambda * sys.pi_weight * sys.coupling * p22));
  out.lower_residual =
      frobenius_norm(RealMatrix(sys.theta2 * e22 - e22.transpose() * sys.theta2));
  return out;
}

DescentResult descend_cost(const PlantObserverSystem& sys, const DescentOptions& opts) {
  DescentResult res;
  res.sys = sys;
  res.cost = cost(res.sys).total;

  double step = opts.initial_step;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const GradientPair g = gradients(res.sys);
    res.grad_norm = std::sqrt(g.grad_l.squaredNorm() + g.grad_m.squaredNorm());
    if (res.grad_norm <= opts.grad_tol * (1.0 + std::abs(res.cost))) {
      res.converged = true;
      return res;
    }
    bool moved = false;
    while (step > 1e-14) {
      PlantObserverSystem trial = res.sys;
      trial.coupling -= step * g.grad_l;
      trial.m_energy = symmetrize(trial.m_energy - step * g.grad_m);
      try {
        const double c = cost(trial).total;
        if (c < res.cost) {
          res.sys = std::move(trial);
          res.cost = c;
          moved = true;
          step *= 2.0;
          break;
        }
      } catch (const Error&) {
        // Step left the admissible region; halve and retry.
      }
      step *= 0.5;
    }
    if (!moved) return res;
  }
  return res;
}

}  // namespace qho
