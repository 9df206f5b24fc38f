#include <benchmark/benchmark.h>

#include <random>

#include "qho/autonomous.hpp"
#include "qho/backaction.hpp"
#include "qho/fixtures.hpp"

using namespace qho;

namespace {

RealMatrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  RealMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = dist(rng);
  m -= (stability_report(m).spectral_abscissa + 0.5) * RealMatrix::Identity(n, n);
  return m;
}

void BM_SolveAle(benchmark::State& state) {
  std::mt19937_64 rng(42);
  const Eigen::Index n = state.range(0);
  const RealMatrix alpha = random_hurwitz(rng, n);
  RealMatrix g(n, n);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = dist(rng);
  const RealMatrix beta = g * g.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(solve_ale(alpha, beta));
}
BENCHMARK(BM_SolveAle)->Arg(4)->Arg(6)->Arg(8);

void BM_SpectralDecompose(benchmark::State& state) {
  const fixtures::SingleOscillator fx = fixtures::ex1();
  const QhoModel model = build_model(fx.theta, fx.energy);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_decompose(model));
}
BENCHMARK(BM_SpectralDecompose);

void BM_DiscountedMomentsAle(benchmark::State& state) {
  const fixtures::SingleOscillator fx = fixtures::ex1();
  const QhoModel model = build_model(fx.theta, fx.energy);
  const InitialMoments init = make_initial_moments(model, fx.sigma);
  for (auto _ : state)
    benchmark::DoNotOptimize(discounted_moments_ale(model, init, fx.tau));
}
BENCHMARK(BM_DiscountedMomentsAle);

void BM_DiscountedMomentsSpectral(benchmark::State& state) {
  const fixtures::SingleOscillator fx = fixtures::ex1();
  const QhoModel model = build_model(fx.theta, fx.energy);
  const InitialMoments init = make_initial_moments(model, fx.sigma);
  const SpectralData spec = spectral_decompose(model);
  for (auto _ : state)
    benchmark::DoNotOptimize(discounted_moments_spectral(spec, init, fx.tau));
}
BENCHMARK(BM_DiscountedMomentsSpectral);

void BM_FixedPointMap(benchmark::State& state) {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const RealMatrix l = 0.5 * weak_coupling_direction(prob);
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point_map(prob, 0.5, l));
}
BENCHMARK(BM_FixedPointMap);

void BM_SmallGain(benchmark::State& state) {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const PlantObserverSystem sys =
      to_system(prob, RealMatrix(0.05 * weak_coupling_direction(prob)), 20.0);
  const CompositeDynamics dyn = assemble(sys);
  for (auto _ : state) benchmark::DoNotOptimize(smallgain_data(sys, dyn));
}
BENCHMARK(BM_SmallGain);

void BM_FrequencyGains(benchmark::State& state) {
  const AutonomousObserverProblem prob = fixtures::ex2();
  const PlantObserverSystem sys =
      to_system(prob, RealMatrix(0.05 * weak_coupling_direction(prob)), 20.0);
  const CompositeDynamics dyn = assemble(sys);
  for (auto _ : state) benchmark::DoNotOptimize(frequency_gains(sys, dyn));
}
BENCHMARK(BM_FrequencyGains);

void BM_HomotopySegment(benchmark::State& state) {
  const AutonomousObserverProblem prob = fixtures::ex2();
  for (auto _ : state) benchmark::DoNotOptimize(homotopy_solve(prob, 0.5, 8));
}
BENCHMARK(BM_HomotopySegment);

}  // namespace

BENCHMARK_MAIN();
