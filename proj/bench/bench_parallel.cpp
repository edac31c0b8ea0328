// Serial vs OpenMP timings for the ensemble and exact-power kernels.
// Arg 0 runs Exec::serial, arg 1 Exec::parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "canon/exact.hpp"
#include "canon/measures.hpp"
#include "canon/simulate.hpp"

namespace {

canon::Exec exec_of(const benchmark::State& state) {
  return state.range(0) ? canon::Exec::parallel : canon::Exec::serial;
}

const canon::ModelSpec& desk_model() {
  static const canon::ModelSpec spec = [] {
    auto plan = canon::preset("desk");
    auto f = *plan.fermi;
    f.beta = 16.0;
    return canon::build_fermi(f);
  }();
  return spec;
}

void BM_BuildReference(benchmark::State& state) {
  const auto& spec = desk_model();
  const auto starts = canon::eta0_candidates(*canon::preset("desk").fermi);
  const auto T = canon::horizon(spec.k(), spec.m(), 0.1);
  for (auto _ : state) {
    auto ref = canon::build_reference(spec, starts, 256, T, 3, exec_of(state));
    benchmark::DoNotOptimize(ref.data());
  }
}

void BM_CoarseTvSeries(benchmark::State& state) {
  const auto& spec = desk_model();
  const auto starts = canon::eta0_candidates(*canon::preset("desk").fermi);
  const auto T = canon::horizon(spec.k(), spec.m(), 0.1);
  const auto ref = canon::build_reference(spec, starts, 256, T, 3, canon::Exec::serial);
  const auto binning = canon::coarse_bins(ref, 16);
  const auto mass = canon::binned_masses(binning, ref);
  for (auto _ : state) {
    auto tv = canon::coarse_tv_series(spec, starts.front(), 256, 2 * T, binning, mass, 4, exec_of(state));
    benchmark::DoNotOptimize(tv.data());
  }
}

void BM_ExactDSeries(benchmark::State& state) {
  canon::FermiSpec f{5, 5, 2.0, {0.0, 0.25, 0.5, 0.75, 1.0}, {2, 2, 3, 3, 4}};
  const auto spec = canon::build_fermi(f);
  for (auto _ : state) {
    auto d = canon::exact_d_series(spec, 60, exec_of(state));
    benchmark::DoNotOptimize(d.data());
  }
}

}  // namespace

BENCHMARK(BM_BuildReference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoarseTvSeries)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactDSeries)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
