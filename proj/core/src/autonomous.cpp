#include "qho/autonomous.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace qho {

namespace {

double matrix_scale(const RealMatrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

// Orthonormal (Frobenius) basis of the symmetric matrices of order n.
std::vector<RealMatrix> symmetric_basis(Eigen::Index n) {
  std::vector<RealMatrix> basis;
  basis.reserve(n * (n + 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    RealMatrix e = RealMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      RealMatrix e = RealMatrix::Zero(n, n);
      e(i, j) = e(j, i) = inv_sqrt2;
      basis.push_back(e);
    }
  return basis;
}

struct PathPointData {
  RealMatrix p;      // coupled controllability Gramian
  double error_ms;
  double penalty;
};

PathPointData evaluate_point(const AutonomousObserverProblem& prob, double mu,
                             const RealMatrix& coupling);

}  // namespace

void validate_problem(const AutonomousObserverProblem& prob) {
  if (prob.n <= 0 || prob.n % 2 != 0)
    throw OddDimension("autonomous problem: order must be positive even");
  auto square = [&](const RealMatrix& m) {
    return m.rows() == prob.n && m.cols() == prob.n;
  };
  if (!square(prob.theta0) || !square(prob.k_energy) || !square(prob.s0) ||
      !square(prob.sigma1) || !square(prob.sigma2) || !square(prob.pi_weight))
    throw DimensionMismatch("autonomous problem: block dimensions are inconsistent");
  if (!is_antisymmetric(prob.theta0) ||
      !Eigen::FullPivLU<RealMatrix>(prob.theta0).isInvertible())
    throw BadCcr("autonomous problem: theta0 must be antisymmetric nonsingular");
  if (!is_symmetric(prob.k_energy) || min_symmetric_eigenvalue(prob.k_energy) <= 0.0)
    throw BadEnergy("autonomous problem: K must be symmetric positive definite");
  if (!Eigen::FullPivLU<RealMatrix>(prob.s0).isInvertible())
    throw StructureViolated("autonomous problem: S0 must be nonsingular");
  if (!is_symmetric(prob.pi_weight) || min_symmetric_eigenvalue(prob.pi_weight) <= 0.0)
    throw BadWeights("autonomous problem: pi_weight must be positive definite");
  if (!(prob.tau > 0.0)) throw HorizonTooLong("autonomous problem: tau must be positive");
}

PlantObserverSystem to_system(const AutonomousObserverProblem& prob,
                              const RealMatrix& coupling, double lambda) {
  PlantObserverSystem sys;
  sys.n = sys.nu = prob.n;
  sys.theta1 = sys.theta2 = prob.theta0;
  sys.k_energy = prob.k_energy;
  sys.m_energy = prob.k_energy;
  sys.coupling = coupling;
  sys.sigma1 = prob.sigma1;
  sys.sigma2 = prob.sigma2;
  sys.s1 = sys.s2 = prob.s0;
  sys.pi_weight = prob.pi_weight;
  sys.lambda = lambda;
  sys.tau = prob.tau;
  return sys;
}

bool structure_check(const RealMatrix& k_energy, const RealMatrix& m_energy,
                     const RealMatrix& coupling, double tol) {
  if (k_energy.rows() != m_energy.rows() || k_energy.rows() != coupling.rows() ||
      coupling.rows() != coupling.cols())
    throw DimensionMismatch("structure_check: requires n = nu");
  const bool mirrored = (m_energy - k_energy).cwiseAbs().maxCoeff() <=
                        tol * matrix_scale(k_energy);
  const bool symmetric = (coupling - coupling.transpose()).cwiseAbs().maxCoeff() <=
                         tol * matrix_scale(coupling);
  return mirrored && symmetric;
}

ErrorDynamics error_dynamics(const AutonomousObserverProblem& prob,
                             const RealMatrix& coupling) {
  validate_problem(prob);
  if (!structure_check(prob.k_energy, prob.k_energy, coupling))
    throw StructureViolated("error_dynamics: coupling must be symmetric");
  const RealMatrix s0_inv = prob.s0.partialPivLu().inverse();
  ErrorDynamics ed;
  ed.theta_hat = 2.0 * prob.s0 * prob.theta0 * prob.s0.transpose();
  ed.r_hat = symmetrize(0.5 * s0_inv.transpose() * (prob.k_energy - coupling) * s0_inv);
  ed.a_hat = 2.0 * ed.theta_hat * ed.r_hat;
  return ed;
}

namespace {

// Gramian data for the mirrored composite at (mu, L); the penalty block of
// C^T C is (1/mu) L Pi L, taken as zero at mu = 0 (the path start).
struct MapData {
  RealMatrix p, q, e;
  RealMatrix a_full;
};

MapData map_gramians(const AutonomousObserverProblem& prob, double mu,
                     const RealMatrix& coupling) {
  const Eigen::Index n = prob.n;
  const PlantObserverSystem sys = to_system(prob, coupling, 1.0);
  RealMatrix a_full = 2.0 * sys.theta_full() * sys.energy_full();
  RealMatrix a_tau = a_full;
  a_tau.diagonal().array() -= 1.0 / (2.0 * prob.tau);

  const double limit = horizon_limit(a_full);
  if (prob.tau >= limit)
    throw HorizonTooLong("fixed_point_map: composite is not tau-admissible");

  MapData md;
  md.a_full = std::move(a_full);
  md.p = solve_ale(a_tau, sys.sigma_full() / prob.tau);

  const RealMatrix s = sys.s_row();
  RealMatrix source = s.transpose() * s;
  if (mu > 0.0)
    source.bottomRightCorner(n, n) +=
        (coupling * prob.pi_weight * coupling) / mu;
  md.q = solve_ale(a_tau.transpose(), source);
  md.e = md.q * md.p;
  return md;
}

PathPointData evaluate_point(const AutonomousObserverProblem& prob, double mu,
                             const RealMatrix& coupling) {
  const MapData md = map_gramians(prob, mu, coupling);
  const PlantObserverSystem sys = to_system(prob, coupling, 1.0);
  const RealMatrix s = sys.s_row();
  PathPointData pt;
  pt.p = md.p;
  pt.error_ms = (s.transpose() * s * md.p).trace();
  pt.penalty =
      mu > 0.0 ? (prob.pi_weight * coupling *
                  md.p.bottomRightCorner(prob.n, prob.n) * coupling)
                         .trace() /
                     mu
               : 0.0;
  return pt;
}

}  // namespace

RealMatrix fixed_point_map(const AutonomousObserverProblem& prob, double mu,
                           const RealMatrix& coupling) {
  validate_problem(prob);
  if (!structure_check(prob.k_energy, prob.k_energy, coupling))
    throw StructureViolated("fixed_point_map: coupling must be symmetric");
  const Eigen::Index n = prob.n;
  const MapData md = map_gramians(prob, mu, coupling);

  const RealMatrix p22 = md.p.bottomRightCorner(n, n);
  if (min_symmetric_eigenvalue(p22) <= 1e-10 * matrix_scale(p22))
    throw DegenerateP22("fixed_point_map: P22 is not positive definite");

  const RealMatrix theta = to_system(prob, coupling, 1.0).theta_full();
  const RealMatrix sym_te = symmetrize(theta * md.e);
  const RealMatrix g = symmetrize(sym_te.topRightCorner(n, n));

  const RealMatrix pi_inv = prob.pi_weight.partialPivLu().inverse();
  const RealMatrix l_tilde = solve_ale(RealMatrix(-p22 * pi_inv), g);
  return symmetrize(8.0 * pi_inv * l_tilde * pi_inv);
}

RealMatrix weak_coupling_direction(const AutonomousObserverProblem& prob) {
  validate_problem(prob);
  const Eigen::Index n = prob.n;
  const RealMatrix id = RealMatrix::Identity(n, n);
  const RealMatrix a = 2.0 * prob.theta0 * prob.k_energy;
  const RealMatrix a_tau = a - id / (2.0 * prob.tau);
  const RealMatrix p1 = solve_ale(a_tau, prob.sigma1 / prob.tau);
  const RealMatrix p2 = solve_ale(a_tau, prob.sigma2 / prob.tau);
  if (min_symmetric_eigenvalue(p2) <= 1e-10 * matrix_scale(p2))
    throw DegenerateP2("weak_coupling_direction: P2 is not positive definite");

  const RealMatrix s0_inv = prob.s0.partialPivLu().inverse();
  const RealMatrix a_hat = 2.0 * prob.s0 * prob.theta0 * prob.k_energy * s0_inv;
  const RealMatrix q_hat = solve_ale(RealMatrix(a_hat.transpose() - id / (2.0 * prob.tau)), id);
  const RealMatrix q0 = prob.s0.transpose() * q_hat * prob.s0;

  const RealMatrix psum = p1 + p2;
  const RealMatrix b0 = prob.theta0 * q0 * psum - psum * q0 * prob.theta0;
  const RealMatrix pi_inv = prob.pi_weight.partialPivLu().inverse();
  return symmetrize(-2.0 * pi_inv * solve_ale(RealMatrix(-p2 * pi_inv), b0) * pi_inv);
}

namespace {

RealMatrix residual(const AutonomousObserverProblem& prob, double mu,
                    const RealMatrix& l) {
  return l - mu * fixed_point_map(prob, mu, l);
}

// Newton step on the symmetric-matrix space with a finite-difference
// Jacobian of g(L) = L - mu f(mu, L).
bool newton_corrector(const AutonomousObserverProblem& prob, double mu,
                      RealMatrix& l, double& res_norm) {
  const auto basis = symmetric_basis(prob.n);
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  const double tol = 1e-10;
  for (int it = 0; it < 40; ++it) {
    const RealMatrix g0 = residual(prob, mu, l);
    res_norm = frobenius_norm(g0);
    if (res_norm <= tol * (1.0 + frobenius_norm(l))) return true;

    const double h = 1e-6 * (1.0 + frobenius_norm(l));
    RealMatrix jac(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const RealMatrix gp = residual(prob, mu, RealMatrix(l + h * basis[j]));
      const RealMatrix gm = residual(prob, mu, RealMatrix(l - h * basis[j]));
      const RealMatrix col = (gp - gm) / (2.0 * h);
      for (Eigen::Index i = 0; i < d; ++i) jac(i, j) = (col.array() * basis[i].array()).sum();
    }
    RealVector rhs(d);
    for (Eigen::Index i = 0; i < d; ++i) rhs(i) = -(g0.array() * basis[i].array()).sum();
    const RealVector dv = jac.partialPivLu().solve(rhs);
    RealMatrix step = RealMatrix::Zero(prob.n, prob.n);
    for (Eigen::Index i = 0; i < d; ++i) step += dv(i) * basis[i];

    double s = 1.0;
    bool moved = false;
    for (int k = 0; k < 10; ++k) {
      const RealMatrix lt = l + s * step;
      try {
        if (frobenius_norm(residual(prob, mu, lt)) < res_norm) {
          l = lt;
          moved = true;
          break;
        }
      } catch (const Error&) {
        // Trial point left the admissible region; shrink.
      }
      s *= 0.5;
    }
    if (!moved) return false;
  }
  return false;
}

bool correct(const AutonomousObserverProblem& prob, double mu, RealMatrix& l,
             double& res_norm) {
  const double tol = 1e-10;
  // Damped fixed-point sweeps; Newton when they stagnate.
  for (int it = 0; it < 12; ++it) {
    RealMatrix f;
    try {
      f = fixed_point_map(prob, mu, l);
    } catch (const Error&) {
      break;
    }
    const RealMatrix g = l - mu * f;
    res_norm = frobenius_norm(g);
    if (res_norm <= tol * (1.0 + frobenius_norm(l))) return true;
    bool improved = false;
    for (double s : {1.0, 0.5, 0.25}) {
      const RealMatrix lt = (1.0 - s) * l + s * mu * f;
      try {
        if (frobenius_norm(residual(prob, mu, lt)) < 0.7 * res_norm) {
          l = lt;
          improved = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!improved) break;
  }
  return newton_corrector(prob, mu, l, res_norm);
}

RealMatrix homotopy_rhs(const AutonomousObserverProblem& prob, double mu,
                        const RealMatrix& l) {
  const auto basis = symmetric_basis(prob.n);
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  const RealMatrix f0 = fixed_point_map(prob, mu, l);
  const double h = 1e-6 * (1.0 + frobenius_norm(l));

  RealMatrix jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const RealMatrix fp = fixed_point_map(prob, mu, RealMatrix(l + h * basis[j]));
    const RealMatrix fm = fixed_point_map(prob, mu, RealMatrix(l - h * basis[j]));
    const RealMatrix col = (fp - fm) / (2.0 * h);
    for (Eigen::Index i = 0; i < d; ++i) jac(i, j) = (col.array() * basis[i].array()).sum();
  }
  RealMatrix dmu_f = RealMatrix::Zero(prob.n, prob.n);
  if (mu > 0.0) {
    const double hm = std::min(1e-6, 0.5 * mu);
    dmu_f = (fixed_point_map(prob, mu + hm, l) - fixed_point_map(prob, mu - hm, l)) /
            (2.0 * hm);
  }

  const RealMatrix target = f0 + mu * dmu_f;
  RealVector rhs(d);
  for (Eigen::Index i = 0; i < d; ++i) rhs(i) = (target.array() * basis[i].array()).sum();
  const RealMatrix sys_m = RealMatrix::Identity(d, d) - mu * jac;
  const RealVector sol = sys_m.partialPivLu().solve(rhs);
  RealMatrix out = RealMatrix::Zero(prob.n, prob.n);
  for (Eigen::Index i = 0; i < d; ++i) out += sol(i) * basis[i];
  return out;
}

}  // namespace

SynthesisTrace homotopy_solve(const AutonomousObserverProblem& prob, double mu_max,
                              int steps) {
  validate_problem(prob);
  if (mu_max < 0.0) throw Error("homotopy_solve: mu_max must be nonnegative");
  if (mu_max > 0.0 && steps < 8) throw Error("homotopy_solve: steps must be >= 8");

  SynthesisTrace trace;
  RealMatrix l = RealMatrix::Zero(prob.n, prob.n);

  auto append = [&](double mu, const RealMatrix& lm, double res) {
    const PathPointData pt = evaluate_point(prob, mu, lm);
    trace.mu_grid.push_back(mu);
    trace.l_path.push_back(lm);
    trace.error_path.push_back(pt.error_ms);
    trace.penalty_path.push_back(pt.penalty);
    trace.cost_path.push_back(pt.error_ms + pt.penalty);
    trace.residual_path.push_back(res);
    RealMatrix r_full(2 * prob.n, 2 * prob.n);
    r_full.topLeftCorner(prob.n, prob.n) = prob.k_energy;
    r_full.topRightCorner(prob.n, prob.n) = lm;
    r_full.bottomLeftCorner(prob.n, prob.n) = lm;
    r_full.bottomRightCorner(prob.n, prob.n) = prob.k_energy;
    const PlantObserverSystem sys = to_system(prob, lm, 1.0);
    const double limit = horizon_limit(2.0 * sys.theta_full() * r_full);
    const bool admissible =
        min_symmetric_eigenvalue(r_full) > 0.0 && prob.tau < limit;
    trace.admissibility_path.push_back(admissible);
    trace.reached_mu = mu;
    return admissible;
  };

  append(0.0, l, 0.0);  // path start, exact
  if (mu_max == 0.0) return trace;

  const double grid_step = mu_max / steps;
  double mu = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double mu_target = i * grid_step;
    double sub = mu_target - mu;
    while (mu < mu_target - 1e-15) {
      const double mu_next = std::min(mu + sub, mu_target);
      RealMatrix l_pred;
      try {
        l_pred = l + (mu_next - mu) * homotopy_rhs(prob, mu, l);
      } catch (const Error&) {
        l_pred = l;
      }
      double res = 0.0;
      RealMatrix l_trial = l_pred;
      if (correct(prob, mu_next, l_trial, res)) {
        mu = mu_next;
        l = symmetrize(l_trial);
      } else {
        sub *= 0.5;
        if (sub < 1e-8) {
          trace.status = TraceStatus::Stalled;
          return trace;
        }
      }
    }
    const double res = frobenius_norm(residual(prob, mu, l));
    if (!append(mu, l, res)) {
      trace.status = TraceStatus::AdmissibilityLost;
      return trace;
    }
  }
  return trace;
}

}  // namespace qho
