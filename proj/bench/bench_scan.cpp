// Parallel scan against the serial reference on the Example 1 field.
#include <benchmark/benchmark.h>

#include "mrplab/fields.hpp"

using namespace mrplab;

namespace {

AnalyticField field(int depth) {
  std::vector<double> xs;
  for (int n = 1; n <= depth; ++n) xs.push_back(n);
  return example1_instance(xs, depth);
}

ScanOptions options(std::size_t points, Oracles oracles) {
  ScanOptions o;
  o.points = points;
  o.lo = 0;
  o.hi = 10;
  o.oracles = oracles;
  return o;
}

void BM_ScanSerial(benchmark::State& state) {
  const AnalyticField f = field(static_cast<int>(state.range(0)));
  const ScanOptions o = options(256, state.range(1) ? Oracles::Triple : Oracles::Direct);
  for (auto _ : state) benchmark::DoNotOptimize(scan_exception_set_serial(f, o));
  state.SetItemsProcessed(state.iterations() * 256);
}

void BM_ScanParallel(benchmark::State& state) {
  const AnalyticField f = field(static_cast<int>(state.range(0)));
  const ScanOptions o = options(256, state.range(1) ? Oracles::Triple : Oracles::Direct);
  for (auto _ : state) benchmark::DoNotOptimize(scan_exception_set(f, o));
  state.SetItemsProcessed(state.iterations() * 256);
}

}  // namespace

BENCHMARK(BM_ScanSerial)->ArgsProduct({{4, 6, 8}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanParallel)->ArgsProduct({{4, 6, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
