#include <doctest.h>

#include "qho/fixtures.hpp"
#include "test_support.hpp"

using namespace qho;

TEST_CASE("structure check: mirrored energy and symmetric coupling") {
  test::Rng rng(1);
  const RealMatrix k = test::random_spd(rng, 2);
  const RealMatrix l_sym = test::random_symmetric(rng, 2);
  CHECK(structure_check(k, k, l_sym));
  CHECK_FALSE(structure_check(k, RealMatrix(k + 1e-3 * RealMatrix::Identity(2, 2)),
                              l_sym));

  // M - K = L - L^T cannot rescue an asymmetric coupling: a symmetric
  // left side equal to an antisymmetric right side forces both to zero.
  RealMatrix l_asym = l_sym;
  l_asym(0, 1) += 0.3;
  const RealMatrix m = k + l_asym - l_asym.transpose();
  CHECK_FALSE(structure_check(k, m, l_asym));
  CHECK_THROWS_AS(structure_check(k, RealMatrix::Identity(3, 3), l_sym),
                  DimensionMismatch);
}

TEST_CASE("error dynamics close under the mirrored structure") {
  const AutonomousObserverProblem prob = fixtures::ex2();

  const ErrorDynamics frozen = error_dynamics(prob, prob.k_energy);
  CHECK(frozen.a_hat.norm() <= 1e-12);

  const ErrorDynamics free = error_dynamics(prob, RealMatrix::Zero(2, 2));
  const RealMatrix expected =
      2.0 * prob.s0 * prob.theta0 * prob.k_energy * prob.s0.inverse();
  CHECK((free.a_hat - expected).norm() <= 1e-10);

  test::Rng rng(9);
  for (int trial = 0; trial < 6; ++trial) {
    const RealMatrix l = test::random_symmetric(rng, 2);
    const ErrorDynamics ed = error_dynamics(prob, l);
    CHECK((ed.a_hat * ed.theta_hat + ed.theta_hat * ed.a_hat.transpose()).norm() <=
          1e-10 * std::max(1.0, ed.a_hat.norm() * ed.theta_hat.norm()));

    // Intertwining S A = A_hat S with S = [S0, -S0].
    const PlantObserverSystem sys = to_system(prob, l, 1.0);
    const RealMatrix a_full = 2.0 * sys.theta_full() * sys.energy_full();
    const RealMatrix s = sys.s_row();
    CHECK((s * a_full - ed.a_hat * s).norm() <=
          1e-10 * std::max(1.0, a_full.norm()));
  }

  RealMatrix asym = RealMatrix::Zero(2, 2);
  asym(0, 1) = 0.4;
  CHECK_THROWS_AS(error_dynamics(prob, asym), StructureViolated);
}

TEST_CASE("fixed-point map reduces to the weak-coupling direction at the origin") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const RealMatrix zero = RealMatrix::Zero(2, 2);
  const RealMatrix f00 = fixed_point_map(prob, 0.0, zero);
  const RealMatrix direction = weak_coupling_direction(prob);
  CHECK((f00 - direction).norm() <= 1e-10 * std::max(1.0, direction.norm()));

  test::Rng rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    const RealMatrix l = 0.2 * test::random_symmetric(rng, 2);
    const RealMatrix f = fixed_point_map(prob, 0.3, l);
    CHECK((f - f.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, f.norm()));
  }
}

TEST_CASE("fixed points coincide with restricted stationarity of the cost") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const SynthesisTrace trace = homotopy_solve(prob, 1.0, 8);
  REQUIRE(trace.status == TraceStatus::Completed);
  const double mu = trace.mu_grid.back();
  const RealMatrix l_star = trace.l_path.back();

  // At the fixed point the symmetric projection of the L-gradient vanishes.
  const PlantObserverSystem at_fix = to_system(prob, l_star, 1.0 / mu);
  const RealMatrix sym_grad = symmetrize(gradients(at_fix).grad_l);
  CHECK(sym_grad.norm() <= 1e-7 * (1.0 + std::abs(cost(at_fix).total)));

  // Away from it, neither the residual nor the projected gradient vanish.
  const RealMatrix l_off = l_star + 0.1 * RealMatrix::Identity(2, 2);
  const PlantObserverSystem off = to_system(prob, l_off, 1.0 / mu);
  CHECK(symmetrize(gradients(off).grad_l).norm() > 1e-3);
  CHECK((l_off - mu * fixed_point_map(prob, mu, l_off)).norm() > 1e-3);
}

TEST_CASE("weak-coupling direction reproduces the ex2 matrix") {
  const RealMatrix direction = weak_coupling_direction(fixtures::ex2());
  RealMatrix printed(2, 2);
  printed << -0.7297, -1.7445, -1.7445, 1.1737;
  CHECK((direction - printed).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK((direction - direction.transpose()).norm() <= 1e-12);
}

TEST_CASE("coupling path converges linearly to its tangent at the origin") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const RealMatrix direction = weak_coupling_direction(prob);
  const SynthesisTrace fine = homotopy_solve(prob, 0.04, 8);
  REQUIRE(fine.status == TraceStatus::Completed);
  // Grid: 0.005, 0.01, ..., 0.04.
  auto at = [&](double mu) {
    for (std::size_t i = 0; i < fine.mu_grid.size(); ++i)
      if (std::abs(fine.mu_grid[i] - mu) < 1e-12) return fine.l_path[i];
    FAIL("mu not on grid");
    return RealMatrix();
  };
  const double d4 = (at(0.04) / 0.04 - direction).norm();
  const double d2 = (at(0.02) / 0.02 - direction).norm();
  const double d1 = (at(0.01) / 0.01 - direction).norm();
  CHECK(d2 < d4);
  CHECK(d1 < d2);
  // Linear convergence: halving mu roughly halves the defect.
  CHECK(d4 / d2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.25));

  // Richardson-fitted slope at mu = 0.01.
  const RealMatrix fitted = 2.0 * at(0.01) / 0.01 - at(0.02) / 0.02;
  CHECK((fitted - direction).norm() <= 0.05 * direction.norm());
}

TEST_CASE("homotopy over the full range reproduces the observed behaviour") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const SynthesisTrace trace = homotopy_solve(prob, 5.0, 64);
  REQUIRE(trace.status == TraceStatus::Completed);
  REQUIRE(trace.mu_grid.size() == 65);

  CHECK(trace.mu_grid.front() == 0.0);
  CHECK(trace.l_path.front().norm() == 0.0);
  CHECK(trace.error_path.front() == doctest::Approx(46.8634).epsilon(1e-3 / 46.0));

  for (std::size_t i = 0; i < trace.mu_grid.size(); ++i) {
    const RealMatrix& l = trace.l_path[i];
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, l.norm()));
    CHECK(trace.residual_path[i] <= 1e-8 * (1.0 + l.norm()));
    CHECK(trace.admissibility_path[i]);
    if (i > 0) CHECK(trace.error_path[i] <= trace.error_path[i - 1] + 1e-9);

    // Composite energy matrix stays positive definite along the path.
    RealMatrix r_full(4, 4);
    r_full.topLeftCorner(2, 2) = prob.k_energy;
    r_full.topRightCorner(2, 2) = l;
    r_full.bottomLeftCorner(2, 2) = l;
    r_full.bottomRightCorner(2, 2) = prob.k_energy;
    CHECK(min_symmetric_eigenvalue(r_full) > 0.0);

    // The error dynamics stay Hamiltonian at every accepted coupling.
    const ErrorDynamics ed = error_dynamics(prob, l);
    CHECK((ed.a_hat * ed.theta_hat + ed.theta_hat * ed.a_hat.transpose()).norm() <=
          1e-10 * std::max(1.0, ed.theta_hat.norm() * (1.0 + ed.a_hat.norm())));
  }

  // Restricted stationarity at every accepted point.
  for (std::size_t i = 1; i < trace.mu_grid.size(); i += 8) {
    const PlantObserverSystem sys =
        to_system(prob, trace.l_path[i], 1.0 / trace.mu_grid[i]);
    CHECK(symmetrize(gradients(sys).grad_l).norm() <=
          1e-6 * (1.0 + std::abs(cost(sys).total)));
  }
}

TEST_CASE("degenerate continuation inputs") {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const SynthesisTrace single = homotopy_solve(prob, 0.0, 64);
  CHECK(single.mu_grid.size() == 1);
  CHECK(single.l_path.front().norm() == 0.0);
  CHECK_THROWS_AS(homotopy_solve(prob, 1.0, 4), Error);
}
