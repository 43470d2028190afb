#include <benchmark/benchmark.h>

#include <vector>

#include "statphase/audit.hpp"
#include "statphase/families.hpp"
#include "statphase/ibp.hpp"
#include "statphase/partition.hpp"
#include "statphase/quadrature.hpp"

using namespace statphase;

namespace {

PhaseModel perturbed(int d) {
  std::vector<double> A(static_cast<std::size_t>(d * d), 0.0);
  for (int i = 0; i < d; ++i) A[static_cast<std::size_t>(i * d + i)] = 1.0 + 0.25 * i;
  return builtin_phase({"perturbed_quadratic", {{"A", A}, {"eps", {0.1}}}, {{"psi", "cos_sum"}}}, Box::cube(d, -1, 1));
}

SymbolModel bump(int d, double r) {
  return builtin_symbol({"smooth_bump", {{"center", std::vector<double>(static_cast<std::size_t>(d), 0.0)}, {"radius", {r}}}}, d);
}

}  // namespace

// Phase jet of order d + 2 at one point.
static void BM_PhaseJet(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto phi = perturbed(d);
  std::vector<double> x(static_cast<std::size_t>(d), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(phi.jet(x, d + 2));
}
BENCHMARK(BM_PhaseJet)->DenseRange(1, 3);

// c_{alpha,N} for N = d + 1.
static void BM_TransposeCoefficients(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto phi = perturbed(d);
  std::vector<double> x(static_cast<std::size_t>(d), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(transpose_power_coeffs(phi, x, d + 1));
}
BENCHMARK(BM_TransposeCoefficients)->DenseRange(1, 3);

static void BM_Audit(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto phi = perturbed(d);
  const auto b = bump(d, 0.5);
  AuditOptions o;
  o.grid_points = d == 1 ? 201 : 41;
  o.injectivity_samples = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(audit(phi, b, o));
}
BENCHMARK(BM_Audit)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

static void BM_Oracle(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const double lambda = static_cast<double>(state.range(1));
  const auto phi = perturbed(d);
  const auto b = bump(d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(oracle_integral(phi, b, lambda));
}
BENCHMARK(BM_Oracle)->Args({1, 64})->Args({1, 4096})->Args({2, 64})->Args({2, 1024})->Unit(benchmark::kMillisecond);

static void BM_Decomposition(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const double lambda = static_cast<double>(state.range(1));
  const auto phi = perturbed(d);
  const auto b = bump(d, 0.5);
  const auto p = PartitionOfUnity::single_ball(b.support());
  for (auto _ : state) benchmark::DoNotOptimize(decomposition_integral(phi, b, lambda, p));
}
BENCHMARK(BM_Decomposition)->Args({1, 64})->Args({1, 4096})->Args({2, 64})->Unit(benchmark::kMillisecond);

static void BM_NearStationaryMeasure(benchmark::State& state) {
  const auto phi = perturbed(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(near_stationary_measure(phi, static_cast<double>(state.range(0)), Box::cube(2, -0.5, 0.5)));
  }
}
BENCHMARK(BM_NearStationaryMeasure)->Arg(16)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
