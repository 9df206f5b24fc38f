#include "qho/oscillator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double matrix_scale(const RealMatrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace

QhoModel build_model(const RealMatrix& theta, const RealMatrix& energy) {
  if (theta.rows() != theta.cols() || energy.rows() != energy.cols() ||
      theta.rows() != energy.rows())
    throw DimensionMismatch("build_model: theta and energy must be square of equal order");
  if (theta.rows() % 2 != 0) throw OddDimension("build_model: order must be even");
  if (!is_antisymmetric(theta)) throw BadCcr("build_model: theta is not antisymmetric");
  Eigen::FullPivLU<RealMatrix> lu(theta);
  if (!lu.isInvertible()) throw BadCcr("build_model: theta is singular");
  if (!is_symmetric(energy)) throw BadEnergy("build_model: energy is not symmetric");

  QhoModel model;
  model.n = theta.rows();
  model.theta = theta;
  model.energy = symmetrize(energy);
  model.dynamics = 2.0 * theta * model.energy;

  // A*Theta + Theta*A^T = 0 holds by construction; only roundoff remains.
  const double pr = (model.dynamics * theta + theta * model.dynamics.transpose())
                        .cwiseAbs()
                        .maxCoeff();
  if (pr > 1e-12 * matrix_scale(model.dynamics) * matrix_scale(theta))
    throw BadCcr("build_model: dynamics lost the Hamiltonian property");
  return model;
}

InitialMoments make_initial_moments(const QhoModel& model, const RealMatrix& sigma,
                                    double uncertainty_tol) {
  if (sigma.rows() != model.n || sigma.cols() != model.n)
    throw DimensionMismatch("make_initial_moments: sigma order differs from model");
  if (!is_symmetric(sigma))
    throw BadEnergy("make_initial_moments: sigma is not symmetric");
  InitialMoments init;
  init.sigma = symmetrize(sigma);
  init.gamma = init.sigma.cast<std::complex<double>>() +
               std::complex<double>(0, 1) * model.theta.cast<std::complex<double>>();
  const double lo = min_hermitian_eigenvalue(init.gamma);
  if (lo < -uncertainty_tol * matrix_scale(sigma))
    throw BadCcr("make_initial_moments: sigma + i*theta is not positive semi-definite");
  return init;
}

SpectralData spectral_decompose(const QhoModel& model) {
  const Eigen::Index n = model.n;
  Eigen::EigenSolver<RealMatrix> es(model.dynamics);
  if (es.info() != Eigen::Success)
    throw EigenFailure("spectral_decompose: eigen-solver did not converge");

  const ComplexVector lam = es.eigenvalues();
  const double rho = lam.cwiseAbs().maxCoeff();
  const double re_tol = kSpectrumRealTol * std::max(1.0, rho);
  if (lam.real().cwiseAbs().maxCoeff() > re_tol)
    throw NotOscillatory("spectral_decompose: spectrum is not purely imaginary");

  const double ztol = 1e-10 * std::max(1.0, rho);
  std::vector<Eigen::Index> positive;
  Eigen::Index zero_count = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double om = lam(k).imag();
    if (om > ztol)
      positive.push_back(k);
    else if (std::abs(om) <= ztol)
      ++zero_count;
  }
  std::sort(positive.begin(), positive.end(), [&](Eigen::Index a, Eigen::Index b) {
    return lam(a).imag() > lam(b).imag();
  });
  if (static_cast<Eigen::Index>(positive.size()) * 2 + zero_count != n)
    throw EigenFailure("spectral_decompose: unpaired eigenvalues");

  SpectralData spec;
  spec.v = ComplexMatrix::Zero(n, n);
  spec.omega = RealVector::Zero(n);
  const Eigen::Index half = n / 2;

  auto normalize = [](ComplexVector v) {
    v /= v.norm();
    Eigen::Index fz = 0;
    while (fz < v.size() && std::abs(v(fz)) <= 1e-12) ++fz;
    if (fz < v.size()) v *= std::conj(v(fz)) / std::abs(v(fz));
    return v;
  };

  Eigen::Index col = 0;
  for (Eigen::Index idx : positive) {
    const ComplexVector v = normalize(es.eigenvectors().col(idx));
    spec.v.col(col) = v;
    spec.v.col(col + half) = v.conjugate();
    spec.omega(col) = lam(idx).imag();
    spec.omega(col + half) = -lam(idx).imag();
    ++col;
  }

  if (zero_count > 0) {
    // Zero modes: the real kernel of A, paired as (z1 + i z2)/sqrt(2) and its
    // conjugate so the conjugate-column convention still holds.
    Eigen::FullPivLU<RealMatrix> lu(model.dynamics);
    lu.setThreshold(1e-9);
    RealMatrix kernel = lu.kernel();
    if (kernel.cols() != zero_count)
      throw DegenerateEigenbasis("spectral_decompose: zero eigenvalue is defective");
    const RealMatrix q =
        Eigen::HouseholderQR<RealMatrix>(kernel).householderQ() *
        RealMatrix::Identity(n, zero_count);
    for (Eigen::Index j = 0; j + 1 < zero_count; j += 2) {
      ComplexVector u = (q.col(j).cast<std::complex<double>>() +
                         std::complex<double>(0, 1) * q.col(j + 1).cast<std::complex<double>>()) /
                        std::sqrt(2.0);
      spec.v.col(col) = u;
      spec.v.col(col + half) = u.conjugate();
      spec.omega(col) = 0.0;
      spec.omega(col + half) = 0.0;
      ++col;
    }
  }
  if (col != half) throw EigenFailure("spectral_decompose: column assembly failed");

  Eigen::JacobiSVD<ComplexMatrix> svd(spec.v);
  const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
  if (!std::isfinite(cond) || cond > kEigenbasisCondLimit)
    throw DegenerateEigenbasis("spectral_decompose: eigenvector matrix is ill-conditioned");

  spec.w = spec.v.partialPivLu().solve(ComplexMatrix::Identity(n, n));
  spec.c.reserve(n);
  for (Eigen::Index k = 0; k < n; ++k)
    spec.c.push_back(spec.v.col(k) * spec.w.row(k));
  return spec;
}

double horizon_limit(const RealMatrix& dynamics) {
  Eigen::EigenSolver<RealMatrix> es(dynamics, false);
  if (es.info() != Eigen::Success)
    throw EigenFailure("horizon_limit: eigen-solver did not converge");
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return abscissa <= 0.0 ? kInf : 1.0 / (2.0 * abscissa);
}

DiscountedMoments discounted_moments_ale(const QhoModel& model,
                                         const InitialMoments& init, double tau) {
  if (!(tau > 0.0)) throw HorizonTooLong("discounted_moments_ale: tau must be positive");
  const double limit = horizon_limit(model.dynamics);
  if (tau >= limit) {
    std::ostringstream os;
    os << "discounted_moments_ale: tau = " << tau << " exceeds the admissible bound " << limit;
    throw HorizonTooLong(os.str());
  }
  const RealMatrix a_tau =
      model.dynamics - RealMatrix::Identity(model.n, model.n) / (2.0 * tau);
  DiscountedMoments out;
  out.tau = tau;
  out.p_real = solve_ale(a_tau, init.sigma / tau);
  out.full = out.p_real.cast<std::complex<double>>() +
             std::complex<double>(0, 1) * model.theta.cast<std::complex<double>>();
  return out;
}

namespace {

std::complex<double> chi_exponential(double u, double tau) {
  return 1.0 / std::complex<double>(1.0, -u * tau);
}

}  // namespace

DiscountedMoments discounted_moments_spectral(const SpectralData& spec,
                                              const InitialMoments& init,
                                              double tau) {
  if (!(tau > 0.0))
    throw HorizonTooLong("discounted_moments_spectral: tau must be positive");
  const Eigen::Index n = spec.omega.size();
  ComplexMatrix core = spec.w * init.gamma * spec.w.adjoint();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      core(j, k) *= chi_exponential(spec.omega(j) - spec.omega(k), tau);
  DiscountedMoments out;
  out.tau = tau;
  out.full = spec.v * core * spec.v.adjoint();
  out.p_real = out.full.real();
  ensure_finite(out.full, "discounted_moments_spectral");
  return out;
}

DiscountedMoments infinite_horizon_moments(const SpectralData& spec,
                                           const InitialMoments& init) {
  const Eigen::Index n = spec.omega.size();
  const double tol = freq_tol(spec.omega);
  ComplexMatrix core = spec.w * init.gamma * spec.w.adjoint();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(spec.omega(j) - spec.omega(k)) > tol) core(j, k) = 0.0;
  DiscountedMoments out;
  out.tau = kInf;
  out.full = spec.v * core * spec.v.adjoint();
  out.p_real = out.full.real();
  ensure_finite(out.full, "infinite_horizon_moments");
  return out;
}

double quadratic_form_average(const SpectralData& spec, const InitialMoments& init,
                              const RealMatrix& pi_weight) {
  // Valid for pairwise-distinct positive frequencies (the reduced
  // one-index sum); callers ensure distinctness.
  const Eigen::Index half = spec.omega.size() / 2;
  const ComplexMatrix pi_c = pi_weight.cast<std::complex<double>>();
  std::complex<double> acc = 0.0;
  for (Eigen::Index k = 0; k < half; ++k) {
    const ComplexVector vk = spec.v.col(k);
    const Eigen::RowVectorXcd wk = spec.w.row(k);
    const std::complex<double> t1 =
        (vk.adjoint() * pi_c * vk).value() * (wk * init.gamma * wk.adjoint()).value();
    const std::complex<double> t2 =
        (vk.transpose() * pi_c * vk.conjugate()).value() *
        (wk.conjugate() * init.gamma * wk.transpose()).value();
    acc += t1 + t2;
  }
  return acc.real();
}

double convergence_margin(const SpectralData& spec) {
  const Eigen::Index half = spec.omega.size() / 2;
  const double tol = freq_tol(spec.omega);
  double lo = kInf;
  for (Eigen::Index j = 0; j < half; ++j)
    for (Eigen::Index k = 0; k < half; ++k)
      for (double sign : {1.0, -1.0}) {
        const double cand = std::abs(spec.omega(j) + sign * spec.omega(k));
        if (cand > tol) lo = std::min(lo, cand);
      }
  if (!std::isfinite(lo))
    throw AllFrequenciesZero("convergence_margin: no nonzero frequency combination");
  return 1.0 / lo;
}

IncommensurabilityResult incommensurability_diagnostic(const RealVector& omega,
                                                       long max_coeff) {
  if (max_coeff < 1)
    throw Error("incommensurability_diagnostic: max_coeff must be >= 1");
  const Eigen::Index m = omega.size();
  const double width = 2.0 * static_cast<double>(max_coeff) + 1.0;
  if (std::pow(width, static_cast<double>(m)) > 1e7)
    throw SearchSpaceTooLarge("incommensurability_diagnostic: search space exceeds 1e7");

  const double tol = freq_tol(omega);
  std::vector<long> lambda(m, 0);

  // Shells of increasing max |coefficient| so the smallest witness is found
  // first; the witness sign is normalized to a positive leading entry.
  for (long shell = 1; shell <= max_coeff; ++shell) {
    std::fill(lambda.begin(), lambda.end(), -shell);
    while (true) {
      const bool on_shell =
          std::any_of(lambda.begin(), lambda.end(),
                      [&](long v) { return std::abs(v) == shell; });
      if (on_shell) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) s += static_cast<double>(lambda[i]) * omega(i);
        if (std::abs(s) < tol) {
          std::vector<long> witness = lambda;
          for (long v : witness) {
            if (v == 0) continue;
            if (v < 0)
              for (auto& x : witness) x = -x;
            break;
          }
          return {false, witness};
        }
      }
      Eigen::Index pos = m - 1;
      while (pos >= 0 && lambda[pos] == shell) lambda[pos--] = -shell;
      if (pos < 0) break;
      ++lambda[pos];
    }
  }
  return {true, {}};
}

}  // namespace qho
