#include "qho/backaction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace qho {

namespace {

RealMatrix plant_a(const PlantObserverSystem& sys) {
  return 2.0 * sys.theta1 * sys.k_energy;
}

void shift(RealMatrix& m, double s) {
  m.diagonal().array() -= s;
}

}  // namespace

SmallGainData smallgain_data(const PlantObserverSystem& sys,
                             const CompositeDynamics& dyn) {
  const Eigen::Index n = sys.n, nu = sys.nu;
  const RealMatrix a_tau = dyn.a_tau.topLeftCorner(n, n);
  const RealMatrix alpha_tau = dyn.a_tau.bottomRightCorner(nu, nu);

  if (!stability_report(a_tau).is_hurwitz || !stability_report(alpha_tau).is_hurwitz)
    throw UncoupledBlocksNotStable(
        "smallgain_data: A_tau or alpha_tau is not Hurwitz");

  const RealMatrix in = RealMatrix::Identity(n, n);
  const RealMatrix inu = RealMatrix::Identity(nu, nu);
  const RealMatrix bl = dyn.a_full.topRightCorner(n, nu);
  const RealMatrix blt = dyn.a_full.bottomLeftCorner(nu, n);

  SmallGainData sg;
  sg.d1 = RealMatrix::Zero(n * n + nu * nu, n * n + nu * nu);
  sg.d1.topLeftCorner(n * n, n * n) = kron_sum(a_tau, a_tau);
  sg.d1.bottomRightCorner(nu * nu, nu * nu) = kron_sum(alpha_tau, alpha_tau);

  sg.d2 = RealMatrix::Zero(2 * n * nu, 2 * n * nu);
  sg.d2.topLeftCorner(n * nu, n * nu) = kron_sum(a_tau, alpha_tau);
  sg.d2.bottomRightCorner(n * nu, n * nu) = kron_sum(alpha_tau, a_tau);

  sg.e1 = RealMatrix::Zero(n * n + nu * nu, 2 * n * nu);
  sg.e1.topLeftCorner(n * n, n * nu) = Eigen::kroneckerProduct(in, bl);
  sg.e1.topRightCorner(n * n, n * nu) = Eigen::kroneckerProduct(bl, in);
  sg.e1.bottomLeftCorner(nu * nu, n * nu) = Eigen::kroneckerProduct(blt, inu);
  sg.e1.bottomRightCorner(nu * nu, n * nu) = Eigen::kroneckerProduct(inu, blt);

  sg.e2 = RealMatrix::Zero(2 * n * nu, n * n + nu * nu);
  sg.e2.topLeftCorner(n * nu, n * n) = Eigen::kroneckerProduct(in, blt);
  sg.e2.topRightCorner(n * nu, nu * nu) = Eigen::kroneckerProduct(bl, inu);
  sg.e2.bottomLeftCorner(n * nu, n * n) = Eigen::kroneckerProduct(blt, in);
  sg.e2.bottomRightCorner(n * nu, nu * nu) = Eigen::kroneckerProduct(inu, bl);

  sg.delta1 = sg.d1.partialPivLu().solve(sg.e1);
  sg.delta2 = sg.d2.partialPivLu().solve(sg.e2);
  sg.norm_delta1 = operator_norm(sg.delta1);
  sg.norm_delta2 = operator_norm(sg.delta2);
  sg.eps = sg.norm_delta1 * sg.norm_delta2;
  return sg;
}

double kappa(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  const RealMatrix p = controllability_gramian(sys, dyn);
  auto [p1, p2] = uncoupled_moments(sys);
  if (min_symmetric_eigenvalue(p1) <= 1e-12 * std::max(1.0, p1.cwiseAbs().maxCoeff()))
    throw SingularP1("kappa: uncoupled plant moment matrix P1 is singular");
  const RealMatrix b = 2.0 * sys.theta1;
  const RealMatrix eta_cov =
      sys.coupling * p.bottomRightCorner(sys.nu, sys.nu) * sys.coupling.transpose();
  const RealMatrix arg = p1.partialPivLu().solve(b * eta_cov * b.transpose());
  return sys.tau * std::sqrt(std::max(0.0, spectral_radius(arg)));
}

std::pair<double, double> frequency_gains(const PlantObserverSystem& sys,
                                          const CompositeDynamics& dyn,
                                          const FrequencyGrid& grid) {
  const RealMatrix a = dyn.a_full.topLeftCorner(sys.n, sys.n);
  const RealMatrix alpha = dyn.a_full.bottomRightCorner(sys.nu, sys.nu);
  const RealMatrix bl = dyn.a_full.topRightCorner(sys.n, sys.nu);
  const RealMatrix blt = dyn.a_full.bottomLeftCorner(sys.nu, sys.n);
  const double sigma0 = 1.0 / (2.0 * sys.tau);

  double omega_max = grid.omega_max;
  if (omega_max <= 0.0) {
    double peak = 1.0;
    for (const RealMatrix* m : {&a, &alpha}) {
      Eigen::EigenSolver<RealMatrix> es(*m, false);
      peak = std::max(peak, es.eigenvalues().imag().cwiseAbs().maxCoeff());
    }
    omega_max = 4.0 * peak;
  }

  // Half linear, half log-spaced toward zero, mirrored to negative omega.
  std::vector<double> omegas;
  const int half = std::max(grid.samples / 2, 16);
  const int nlin = half / 2, nlog = half - nlin;
  for (int i = 0; i < nlin; ++i)
    omegas.push_back(omega_max * (i + 1) / nlin);
  const double lo = omega_max * 1e-4;
  for (int i = 0; i < nlog; ++i)
    omegas.push_back(lo * std::pow(omega_max / lo, double(i) / (nlog - 1)));
  const std::size_t pos_count = omegas.size();
  for (std::size_t i = 0; i < pos_count; ++i) omegas.push_back(-omegas[i]);
  omegas.push_back(0.0);
  std::sort(omegas.begin(), omegas.end());

  auto gain_at = [&](const RealMatrix& sys_m, const RealMatrix& input,
                     double om) {
    const Eigen::Index k = sys_m.rows();
    ComplexMatrix shifted =
        std::complex<double>(sigma0, om) * ComplexMatrix::Identity(k, k) -
        sys_m.cast<std::complex<double>>();
    Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    ComplexMatrix t = lu.solve(input.cast<std::complex<double>>());
    if (!t.allFinite())
      throw ResolventSingular("frequency_gains: resolvent evaluation failed");
    return operator_norm(t);
  };

  auto sup_gain = [&](const RealMatrix& sys_m, const RealMatrix& input) {
    double best = 0.0, best_om = 0.0;
    for (double om : omegas) {
      const double g = gain_at(sys_m, input, om);
      if (g > best) {
        best = g;
        best_om = om;
      }
    }
    // Local refinement around the grid argmax.
    double width = 2.0 * omega_max / std::max<std::size_t>(omegas.size(), 2);
    for (int pass = 0; pass < grid.refine_passes; ++pass) {
      const int fine = 17;
      double lo_om = best_om - width, hi_om = best_om + width;
      for (int i = 0; i <= fine; ++i) {
        const double om = lo_om + (hi_om - lo_om) * i / fine;
        const double g = gain_at(sys_m, input, om);
        if (g > best) {
          best = g;
          best_om = om;
        }
      }
      width /= fine / 2.0;
    }
    return best;
  };

  return {sup_gain(a, bl), sup_gain(alpha, blt)};
}

DeviationSandwich deviation_sandwich(const PlantObserverSystem& sys, double w,
                                     double m) {
  if (!(w > 0.0)) throw BadWeights("deviation_sandwich: w must be positive");
  if (!(m > sys.tau))
    throw BadWeights("deviation_sandwich: m must exceed tau (theta > 0)");
  const double varsigma = w * sys.tau / (w + sys.tau);
  const double theta_hor = m * sys.tau / (m - sys.tau);

  const CompositeDynamics dyn = assemble(sys);
  const double limit = horizon_limit(dyn.a_full);
  if (theta_hor >= limit)
    throw HorizonTooLong("deviation_sandwich: observer is not theta-admissible");

  const RealMatrix p = controllability_gramian(sys, dyn);
  auto [p1, p2] = uncoupled_moments(sys);
  const RealMatrix b = 2.0 * sys.theta1;
  const RealMatrix eta_cov =
      sys.coupling * p.bottomRightCorner(sys.nu, sys.nu) * sys.coupling.transpose();
  const RealMatrix bcov = b * eta_cov * b.transpose();

  RealMatrix a_varsigma = plant_a(sys);
  RealMatrix a_theta = plant_a(sys);
  shift(a_varsigma, 1.0 / (2.0 * varsigma));
  shift(a_theta, 1.0 / (2.0 * theta_hor));

  DeviationSandwich out;
  out.lower = -solve_ale(a_varsigma, p1 / w + w * bcov);
  out.upper = solve_ale(a_theta, p1 / m + m * bcov);
  return out;
}

BackactionReport deviation_bounds(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  const SmallGainData sg = smallgain_data(sys, dyn);

  const RealMatrix p = controllability_gramian(sys, dyn);
  auto [p1, p2] = uncoupled_moments(sys);
  RealMatrix p_star = RealMatrix::Zero(sys.order(), sys.order());
  p_star.topLeftCorner(sys.n, sys.n) = p1;
  p_star.bottomRightCorner(sys.nu, sys.nu) = p2;
  const double p_star_norm = frobenius_norm(p_star);

  BackactionReport rep;
  rep.eps = sg.eps;
  rep.smallgain_ok = sg.eps < 1.0;
  rep.observed_p11_dev = frobenius_norm(RealMatrix(p.topLeftCorner(sys.n, sys.n) - p1));
  rep.observed_full_dev = frobenius_norm(RealMatrix(p - p_star));
  if (rep.smallgain_ok) {
    rep.bound_p11 = sg.eps / (1.0 - sg.eps) * p_star_norm;
    rep.bound_full = std::sqrt(1.0 + sg.norm_delta1 * sg.norm_delta1) /
                     (1.0 - sg.eps) * sg.norm_delta2 * p_star_norm;
  }
  rep.kappa = kappa(sys);
  std::tie(rep.gamma1, rep.gamma2) = frequency_gains(sys, dyn);

  if (sys.coupling.isZero(0.0)) {
    // Uncoupled: all deviations and bounds vanish; the sandwich degenerates.
    rep.sandwich_valid = true;
    rep.sandwich_lower_slack = 0.0;
    rep.sandwich_upper_slack = 0.0;
    return rep;
  }

  if (rep.kappa > 0.0 && rep.kappa < 1.0) {
    const double wm = sys.tau / rep.kappa;
    const DeviationSandwich sandwich = deviation_sandwich(sys, wm, wm);
    const RealMatrix dev = p.topLeftCorner(sys.n, sys.n) - p1;
    rep.sandwich_valid = true;
    rep.sandwich_lower_slack = min_symmetric_eigenvalue(dev - sandwich.lower);
    rep.sandwich_upper_slack = min_symmetric_eigenvalue(sandwich.upper - dev);
  }
  return rep;
}

double estimation_error_lower_bound(const PlantObserverSystem& sys) {
  const CompositeDynamics dyn = assemble(sys);
  const SmallGainData sg = smallgain_data(sys, dyn);
  if (sg.eps >= 1.0)
    throw SmallGainViolated("estimation_error_lower_bound: eps >= 1");
  auto [p1, p2] = uncoupled_moments(sys);
  const double base = (sys.s1 * p1 * sys.s1.transpose()).trace() +
                      (sys.s2 * p2 * sys.s2.transpose()).trace();
  const RealMatrix ss =
      sys.s1 * sys.s1.transpose() + sys.s2 * sys.s2.transpose();
  const double p_star_norm =
      std::sqrt(p1.squaredNorm() + p2.squaredNorm());
  const double slack = std::sqrt((ss * ss).trace()) *
                       std::sqrt(1.0 + sg.norm_delta1 * sg.norm_delta1) /
                       (1.0 - sg.eps) * sg.norm_delta2 * p_star_norm;
  return base - slack;
}

}  // namespace qho
