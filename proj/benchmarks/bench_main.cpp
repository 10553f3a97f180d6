#include <benchmark/benchmark.h>

#include "semioverlap/hamiltonian.hpp"
#include "semioverlap/overlap.hpp"
#include "semioverlap/quantize.hpp"
#include "semioverlap/sixj.hpp"

using namespace semioverlap;

static void BM_TraceQuarticLevel(benchmark::State& state) {
  const auto H = quartic_well();
  for (auto _ : state) benchmark::DoNotOptimize(cycle_action(trace_well_level(H, 1.0)));
}
BENCHMARK(BM_TraceQuarticLevel);

static void BM_BohrSommerfeld(benchmark::State& state) {
  const auto H = quartic_well();
  for (auto _ : state) benchmark::DoNotOptimize(bohr_sommerfeld(H, 0.05, static_cast<int>(state.range(0)), 0.05));
}
BENCHMARK(BM_BohrSommerfeld)->Arg(10)->Arg(40);

static void BM_WeylEigensolve(benchmark::State& state) {
  const QuantumGrid grid{-6.0, 6.0, static_cast<int>(state.range(0)), 0.05};
  const auto H = quartic_well();
  for (auto _ : state) {
    const auto M = weyl_quantize(H, grid);
    benchmark::DoNotOptimize(exact_spectrum(M, 10, grid.dq()));
  }
}
BENCHMARK(BM_WeylEigensolve)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_Racah6jExact(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const auto in = SixJInput::from_doubled({t, t, t, t, t, t});
  for (auto _ : state) benchmark::DoNotOptimize(racah_6j(in));
}
BENCHMARK(BM_Racah6jExact)->Arg(8)->Arg(32)->Arg(64);

static void BM_PonzanoRegge(benchmark::State& state) {
  const auto in = SixJInput::from_doubled({64, 64, 64, 64, 64, 64});
  for (auto _ : state) benchmark::DoNotOptimize(ponzano_regge(in));
}
BENCHMARK(BM_PonzanoRegge);

static void BM_OverlapAsymptotic(benchmark::State& state) {
  const auto H1 = harmonic_oscillator(), H2 = harmonic_oscillator(2.0);
  const double h = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(overlap_asymptotic(H1, h * 20.5, H2, h * 20.5, h));
}
BENCHMARK(BM_OverlapAsymptotic)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
