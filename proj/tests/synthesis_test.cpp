#include <doctest.h>

#include "qho/fixtures.hpp"
#include "test_support.hpp"

using namespace qho;

namespace {

PlantObserverSystem ex2_at_zero() {
  return to_system(fixtures::ex2(), RealMatrix::Zero(2, 2), 1.0);
}

// Full (L, M) stationary point of the ex2 cost at lambda = 0.2, constructed
// by Newton refinement from the mirrored-class continuation endpoint.
const PlantObserverSystem& ex2_stationary() {
  static const PlantObserverSystem sys = [] {
    const AutonomousObserverProblem prob = fixtures::ex2();
    const SynthesisTrace trace = homotopy_solve(prob, 5.0, 16);
    REQUIRE(trace.status == TraceStatus::Completed);
    PlantObserverSystem s = to_system(prob, trace.l_path.back(), 0.2);
    REQUIRE(test::refine_stationary(s));
    return s;
  }();
  return sys;
}

}  // namespace

TEST_CASE("cost splits into error and penalty and matches its dual form") {
  const CostReport uncoupled = cost(ex2_at_zero());
  CHECK(uncoupled.error_ms == doctest::Approx(46.8634).epsilon(1e-3 / 46.0));
  CHECK(uncoupled.penalty == 0.0);

  PlantObserverSystem weightless = ex2_at_zero();
  weightless.s1.setZero();
  weightless.s2.setZero();
  CHECK(cost(weightless).total == 0.0);

  test::Rng rng(51);
  for (int trial = 0; trial < 8; ++trial) {
    const PlantObserverSystem sys = test::random_admissible_system(rng, 2, 2);
    const CostReport rep = cost(sys);
    CHECK(std::abs(rep.total - rep.error_ms - rep.penalty) <=
          1e-10 * std::max(1.0, std::abs(rep.total)));
    CHECK(std::abs(rep.total - rep.total_dual) <=
          1e-9 * std::max(1.0, std::abs(rep.total)));
    CHECK(rep.total >= 0.0);
  }
}

TEST_CASE("gradients match central finite differences") {
  test::Rng rng(53);
  for (int trial = 0; trial < 4; ++trial) {
    const PlantObserverSystem sys = test::random_admissible_system(rng, 2, 2);
    const GradientPair g = gradients(sys);
    CHECK((g.grad_m - g.grad_m.transpose()).norm() <=
          1e-10 * std::max(1.0, g.grad_m.norm()));

    const double h = 1e-5 * (1.0 + sys.coupling.norm());
    for (int dir = 0; dir < 10; ++dir) {
      RealMatrix dl = test::random_matrix(rng, 2, 2);
      dl /= dl.norm();
      const double fd = test::fd_cost_l(sys, dl, h);
      const double ip = (g.grad_l.array() * dl.array()).sum();
      CHECK(std::abs(fd - ip) <= 1e-5 * (1.0 + std::abs(ip)));

      RealMatrix dm = test::random_symmetric(rng, 2);
      dm /= dm.norm();
      const double fdm = test::fd_cost_m(sys, dm, h);
      const double ipm = (g.grad_m.array() * dm.array()).sum();
      CHECK(std::abs(fdm - ipm) <= 1e-5 * (1.0 + std::abs(ipm)));
    }
  }
}

TEST_CASE("the uncoupled mirrored observer is not L-stationary: coupling pays") {
  const GradientPair g = gradients(ex2_at_zero());
  CHECK(g.grad_l.norm() > 1e-2);
}

TEST_CASE("gradients vanish at the refined stationary point") {
  const PlantObserverSystem& sys = ex2_stationary();
  const GradientPair g = gradients(sys);
  const double scale = 1e-6 * (1.0 + std::abs(cost(sys).total));
  CHECK(g.grad_l.norm() <= scale);
  CHECK(g.grad_m.norm() <= scale);
}

TEST_CASE("stationarity residuals") {
  // Weightless uncoupled instance: everything vanishes identically.
  test::Rng rng(59);
  PlantObserverSystem trivial = test::random_admissible_system(rng, 2, 2);
  trivial.coupling.setZero();
  trivial.s1.setZero();
  trivial.s2.setZero();
  const StationarityResidual zero = stationarity(trivial);
  CHECK(zero.res_l == 0.0);
  CHECK(zero.res_m == 0.0);
  CHECK(zero.res_lie_l == 0.0);
  CHECK(zero.res_lie_m == 0.0);

  // Generic instances sit away from stationarity.
  const StationarityResidual generic =
      stationarity(test::random_admissible_system(rng, 2, 2));
  CHECK(generic.res_l > 1e-6);
  CHECK(generic.res_m > 1e-8);

  // At the full stationary point all four residuals vanish, and the standard
  // and Lie forms vanish together.
  const StationarityResidual at_opt = stationarity(ex2_stationary());
  CHECK(at_opt.res_l <= 1e-7);
  CHECK(at_opt.res_m <= 1e-7);
  CHECK(at_opt.res_lie_l <= 1e-6);
  CHECK(at_opt.res_lie_m <= 1e-6);
}

TEST_CASE("restricted residual vanishes along the mirrored continuation") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const SynthesisTrace trace = homotopy_solve(prob, 5.0, 16);
  REQUIRE(trace.status == TraceStatus::Completed);
  const std::size_t last = trace.mu_grid.size() - 1;
  const PlantObserverSystem endpoint =
      to_system(prob, trace.l_path[last], 1.0 / trace.mu_grid[last]);
  const StationarityResidual res = stationarity(endpoint);
  CHECK(res.res_l_restricted <= 1e-6 * (1.0 + std::abs(cost(endpoint).total)));
  // The unrestricted conditions do not hold in the restricted class.
  CHECK(res.res_lie_l > 1.0);
  CHECK(res.res_lie_m > 1.0);
}

TEST_CASE("coupling recovery is a fixed point at stationarity") {
  const PlantObserverSystem& sys = ex2_stationary();
  const GramianSet g = gramian_set(sys, assemble(sys));
  const RealMatrix recovered = recover_coupling(g, sys);
  CHECK((recovered - sys.coupling).norm() <= 1e-6 * (1.0 + sys.coupling.norm()));

  // Hankelian and Lie forms agree on arbitrary admissible instances.
  test::Rng rng(61);
  for (int trial = 0; trial < 6; ++trial) {
    const PlantObserverSystem inst = test::random_admissible_system(rng, 2, 2);
    const GramianSet gi = gramian_set(inst, assemble(inst));
    const RealMatrix via_hankelian = recover_coupling(gi, inst);
    const RealMatrix via_lie =
        (2.0 / inst.lambda) * inst.pi_weight.inverse() *
        gi.lie_d.topRightCorner(2, 2) *
        gi.lie_p.bottomRightCorner(2, 2).inverse();
    CHECK((via_hankelian - via_lie).norm() <=
          1e-9 * std::max(1.0, via_hankelian.norm()));
  }

  // 1/lambda scaling with frozen Gramians.
  PlantObserverSystem scaled = sys;
  scaled.lambda *= 1e6;
  const RealMatrix shrunk = recover_coupling(g, scaled);
  CHECK((1e6 * shrunk - recovered).norm() <= 1e-6 * recovered.norm());
}

TEST_CASE("observer energy recovery at a nondegenerate stationary point") {
  const PlantObserverSystem& sys = ex2_stationary();
  const GramianSet g = gramian_set(sys, assemble(sys));

  const ObserverEnergyRecovery rec = recover_observer_energy(g, sys);
  CHECK((rec.m - sys.m_energy).norm() <= 1e-5 * (1.0 + sys.m_energy.norm()));
  CHECK(rec.symmetry_defect <= 1e-6 * (1.0 + sys.m_energy.norm()));

  // The linear identity in M from the (1,2) Jacobi block with D22 = 0.
  const CompositeDynamics dyn = assemble(sys);
  const RealMatrix theta = sys.theta_full();
  const RealMatrix theta_inv = theta.inverse();
  const RealMatrix ctc = dyn.c_full.transpose() * dyn.c_full;
  auto comm = [](const RealMatrix& x, const RealMatrix& y) {
    return RealMatrix(x * y - y * x);
  };
  const RealMatrix jac12 =
      (comm(RealMatrix(sys.sigma_full() * theta_inv), g.lie_q) / sys.tau +
       comm(RealMatrix(theta * ctc), g.lie_p))
          .topRightCorner(2, 2);
  const RealMatrix d11 = g.lie_d.topLeftCorner(2, 2);
  const RealMatrix d12 = g.lie_d.topRightCorner(2, 2);
  const RealMatrix residual = 0.5 * jac12 + d11 * sys.theta1 * sys.coupling -
                              sys.theta1 * sys.k_energy * d12 +
                              d12 * sys.theta2 * sys.m_energy;
  CHECK(residual.norm() <= 1e-8 * (1.0 + g.lie_d.norm()));
  CHECK(g.lie_d.bottomRightCorner(2, 2).norm() <= 1e-6);

  test::Rng rng(67);
  const PlantObserverSystem rect = test::random_admissible_system(rng, 4, 2);
  const GramianSet gr = gramian_set(rect, assemble(rect));
  CHECK_THROWS_AS(recover_observer_energy(gr, rect), DimensionMismatch);
}

TEST_CASE("standard and Lie M-residuals are norm-equivalent") {
  // res_m = ||D22 Theta2|| and res_lie_m = ||D22||, so each bounds the other
  // through the extreme singular values of Theta2.
  test::Rng rng(73);
  for (int trial = 0; trial < 6; ++trial) {
    const PlantObserverSystem sys = test::random_admissible_system(rng, 2, 2);
    const StationarityResidual r = stationarity(sys);
    const double hi = operator_norm(sys.theta2);
    const double lo = 1.0 / operator_norm(RealMatrix(sys.theta2.inverse()));
    CHECK(r.res_m <= hi * r.res_lie_m * (1.0 + 1e-12));
    CHECK(r.res_m >= lo * r.res_lie_m * (1.0 - 1e-12));
  }
}

TEST_CASE("covariance relation residuals") {
  test::Rng rng(71);
  PlantObserverSystem quiet = test::random_admissible_system(rng, 2, 2);
  quiet.coupling.setZero();
  quiet.s1.setZero();
  quiet.s2.setZero();
  const GramianSet gq = gramian_set(quiet, assemble(quiet));
  const CovarianceRelationCheck zero = covariance_relation_check(quiet, gq);
  CHECK(zero.upper_residual == 0.0);
  CHECK(zero.lower_residual == 0.0);

  const PlantObserverSystem generic = test::random_admissible_system(rng, 2, 2);
  const GramianSet gg = gramian_set(generic, assemble(generic));
  const CovarianceRelationCheck busy = covariance_relation_check(generic, gg);
  CHECK(busy.upper_residual > 1e-8);

  const PlantObserverSystem& opt = ex2_stationary();
  const GramianSet go = gramian_set(opt, assemble(opt));
  const CovarianceRelationCheck at_opt = covariance_relation_check(opt, go);
  CHECK(at_opt.upper_residual <= 1e-6);
  CHECK(at_opt.lower_residual <= 1e-6);
}

TEST_CASE("gradient descent reduces the cost and the gradient") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const SynthesisTrace trace = homotopy_solve(prob, 2.0, 8);
  REQUIRE(trace.status == TraceStatus::Completed);
  PlantObserverSystem start = to_system(prob, trace.l_path.back(), 0.5);
  start.coupling += 0.05 * RealMatrix::Identity(2, 2);  // push off the path

  const double cost_before = cost(start).total;
  const double grad_before =
      std::sqrt(gradients(start).grad_l.squaredNorm() +
                gradients(start).grad_m.squaredNorm());
  DescentOptions opts;
  opts.max_iterations = 400;
  const DescentResult res = descend_cost(start, opts);
  CHECK(res.cost < cost_before);
  CHECK(res.grad_norm < grad_before);
}
