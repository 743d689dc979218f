#include <random>

#include <benchmark/benchmark.h>

#include "thermolen/geodesic.hpp"
#include "thermolen/lindblad.hpp"
#include "thermolen/metric.hpp"
#include "thermolen/models.hpp"
#include "thermolen/simulate.hpp"

using namespace thermolen;

namespace {

LindbladGenerator random_generator(int d) {
  std::mt19937_64 rng(static_cast<unsigned>(d));
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = {n(rng), n(rng)};
  return gibbs_mixing(HermitianOperator(CMatrix(0.5 * (a + a.adjoint()))), 1.0, 1.0);
}

void BM_GibbsState(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const HermitianOperator h = random_generator(d).system_hamiltonian();
  for (auto _ : state) benchmark::DoNotOptimize(gibbs_state(h, 1.0));
}
BENCHMARK(BM_GibbsState)->Arg(2)->Arg(4)->Arg(8);

void BM_DrazinTraceless(benchmark::State& state) {
  const LindbladGenerator gen = random_generator(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drazin_traceless(gen));
}
BENCHMARK(BM_DrazinTraceless)->Arg(2)->Arg(4)->Arg(8);

void BM_DrazinSpectral(benchmark::State& state) {
  const LindbladGenerator gen = random_generator(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drazin_spectral(gen));
}
BENCHMARK(BM_DrazinSpectral)->Arg(2)->Arg(4)->Arg(8);

void BM_QubitMetric(benchmark::State& state) {
  const ParamModel model = qubit_model();
  const RVector x = (RVector(3) << 1.3, 0.8, 0.2).finished();
  for (auto _ : state) benchmark::DoNotOptimize(metric_matrix(model, x));
}
BENCHMARK(BM_QubitMetric);

void BM_IsingMetric(benchmark::State& state) {
  const double beta = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ising_metric(0.97, beta));
}
BENCHMARK(BM_IsingMetric)->Arg(1)->Arg(5)->Arg(20);

void BM_XzGeodesic(benchmark::State& state) {
  const ChristoffelField chr(qubit_closed_form_field(QubitChart::xz), DerivativeScheme::central_difference);
  const RVector a = (RVector(2) << 1.0, 0.0).finished(), b = (RVector(2) << 1.4142135623730951, 0.7853981633974483).finished();
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_bvp(chr, a, b));
}
BENCHMARK(BM_XzGeodesic)->Unit(benchmark::kMillisecond);

void BM_PropagateRamp(benchmark::State& state) {
  const ParamModel model = energy_qubit_model();
  const Protocol p = Protocol::linear(RVector::Zero(1), RVector::Constant(1, 2.0));
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(propagate(model, p, t));
}
BENCHMARK(BM_PropagateRamp)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
