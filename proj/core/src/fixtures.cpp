#include "qho/fixtures.hpp"

#include <cstdio>
#include <string>

namespace qho::fixtures {

namespace {

RealMatrix planck_pairs(Eigen::Index modes) {
  RealMatrix j(2, 2);
  j << 0, 1, -1, 0;
  RealMatrix theta = RealMatrix::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) theta.block(2 * k, 2 * k, 2, 2) = 0.5 * j;
  return theta;
}

}  // namespace

SingleOscillator ex1() {
  SingleOscillator fx;
  fx.theta = planck_pairs(2);
  fx.energy = RealMatrix(4, 4);
  fx.energy << 3.4048, 3.0478, -2.2402, -1.4028,
      3.0478, 4.1266, -2.0050, -2.4614,
      -2.2402, -2.0050, 2.0076, 0.8484,
      -1.4028, -2.4614, 0.8484, 4.7504;
  fx.sigma = RealMatrix(4, 4);
  fx.sigma << 5.9068, -2.2359, -0.8477, 2.0721,
      -2.2359, 4.7534, 4.6272, -2.8090,
      -0.8477, 4.6272, 6.7367, -4.1352,
      2.0721, -2.8090, -4.1352, 4.8525;
  fx.tau = 3.8225;  // five convergence margins
  return fx;
}

AutonomousObserverProblem ex2() {
  AutonomousObserverProblem prob;
  prob.n = 2;
  prob.theta0 = planck_pairs(1);
  prob.k_energy = RealMatrix(2, 2);
  prob.k_energy << 2.7604, -1.7564, -1.7564, 2.4982;
  prob.sigma1 = RealMatrix(2, 2);
  prob.sigma1 << 4.1400, -2.4687, -2.4687, 4.3641;
  prob.sigma2 = RealMatrix(2, 2);
  prob.sigma2 << 2.2174, 1.3387, 1.3387, 2.4695;
  prob.pi_weight = RealMatrix(2, 2);
  prob.pi_weight << 1.2907, 0.9694, 0.9694, 3.7716;
  prob.s0 = RealMatrix(2, 2);
  prob.s0 << -1.7389, 0.2192, 0.0170, 1.0458;
  prob.tau = 4.0614;
  return prob;
}

std::uint64_t fingerprint() {
  std::string blob;
  auto feed = [&blob](const RealMatrix& m) {
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g;", m(i, j));
        blob += buf;
      }
  };
  const SingleOscillator one = ex1();
  feed(one.theta);
  feed(one.energy);
  feed(one.sigma);
  blob += std::to_string(one.tau) + "|";
  const AutonomousObserverProblem two = ex2();
  feed(two.theta0);
  feed(two.k_energy);
  feed(two.sigma1);
  feed(two.sigma2);
  feed(two.pi_weight);
  feed(two.s0);
  blob += std::to_string(two.tau);

  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : blob) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace qho::fixtures
