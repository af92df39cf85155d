// OpenMP kernels against their single-threaded references.
// Thread count comes from OMP_NUM_THREADS; grid size is the benchmark argument.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "nevac/hardy.hpp"
#include "nevac/oracle.hpp"

namespace {

using namespace nevac;

const SchurState& state() {
  static const SchurState s = [] {
    const SpectralModel poles{ModelKind::DeltaPoles,
                              {{0.3, -1.5, 0.0}, {0.5, 0.4, 0.0}, {0.2, 2.2, 0.0}, {0.4, -0.3, 0.0}}, true};
    std::vector<long> idx;
    for (long n = 0; n < 12; ++n) idx.push_back(n);
    return schur_coefficients(disk_values(oracle_matsubara(poles, Real(10.0, 256), idx, Statistics::Fermionic)));
  }();
  return s;
}

RealFrequencyGrid grid_for(const benchmark::State& st) {
  return RealFrequencyGrid(-8.0, 8.0, static_cast<std::size_t>(st.range(0)));
}

void BM_ExtractSpectralSerial(benchmark::State& st) {
  const auto f = constant_free_function({0.1, -0.2}, 256);
  const EvaluationConfig cfg{1e-3, grid_for(st)};
  for (auto _ : st) benchmark::DoNotOptimize(extract_spectral_serial(state(), f, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ExtractSpectralParallel(benchmark::State& st) {
  const auto f = constant_free_function({0.1, -0.2}, 256);
  const EvaluationConfig cfg{1e-3, grid_for(st)};
  for (auto _ : st) benchmark::DoNotOptimize(extract_spectral(state(), f, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
  st.counters["threads"] = omp_get_max_threads();
}

void BM_TransferMatricesSerial(benchmark::State& st) {
  const auto grid = grid_for(st);
  for (auto _ : st) benchmark::DoNotOptimize(grid_transfer_matrices_serial(state(), grid, 1e-3));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_TransferMatricesParallel(benchmark::State& st) {
  const auto grid = grid_for(st);
  for (auto _ : st) benchmark::DoNotOptimize(grid_transfer_matrices(state(), grid, 1e-3));
  st.SetItemsProcessed(st.iterations() * st.range(0));
  st.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_ExtractSpectralSerial)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExtractSpectralParallel)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransferMatricesSerial)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransferMatricesParallel)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
