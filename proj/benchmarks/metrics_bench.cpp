#include <benchmark/benchmark.h>

#include "treeffuse/metrics.hpp"
#include "treeffuse/rng.hpp"

using namespace treeffuse;

static void BM_CrpsEmpirical(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& v : samples) v = rng.normal();
  for (auto _ : state) {
    double c = crps_empirical(samples, 0.25);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_CrpsEmpirical)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
