// Parallel kernels against their serial references. On one core the two
// should match; the gap grows with RMT_THREADS.
#include <benchmark/benchmark.h>

#include "rmt/ensembles.hpp"
#include "rmt/exponents.hpp"

namespace {

void BM_Lyapunov(benchmark::State& st) {
  const auto spec = rmt::ProductSpec::ginibre(2, 4, {0});
  for (auto _ : st) benchmark::DoNotOptimize(rmt::mc_lyapunov(spec, 1000, st.range(0), 1).means);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LyapunovSerial(benchmark::State& st) {
  const auto spec = rmt::ProductSpec::ginibre(2, 4, {0});
  for (auto _ : st) benchmark::DoNotOptimize(rmt::mc_lyapunov_serial(spec, 1000, st.range(0), 1).means);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Spectra(benchmark::State& st) {
  const auto spec = rmt::ProductSpec::ginibre(2, 8, {0, 1});
  for (auto _ : st) benchmark::DoNotOptimize(rmt::sample_spectra(spec, st.range(0), 2).samples.size());
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_SpectraSerial(benchmark::State& st) {
  const auto spec = rmt::ProductSpec::ginibre(2, 8, {0, 1});
  for (auto _ : st) benchmark::DoNotOptimize(rmt::sample_spectra_serial(spec, st.range(0), 2).samples.size());
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_Lyapunov)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LyapunovSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spectra)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectraSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
