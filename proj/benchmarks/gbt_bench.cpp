#include <benchmark/benchmark.h>

#include "treeffuse/gbt.hpp"
#include "treeffuse/rng.hpp"

using namespace treeffuse;

namespace {

Matrix random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  Matrix x(n, d);
  Rng rng(seed);
  for (auto& v : x.data) v = rng.normal();
  return x;
}

}  // namespace

static void BM_FitTree(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix x = random_features(n, 8, 7);
  Rng rng(11);
  std::vector<double> residuals(n);
  for (std::size_t i = 0; i < n; ++i)
    residuals[i] = x(i, 0) + 0.3 * rng.normal();

  GbtParams params;
  BinMap map = build_bins(x, params.max_bins);
  BinnedMatrix b = bin_matrix(map, x);
  for (auto _ : state) {
    Tree t = fit_tree(b, residuals, params);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FitTree)->Arg(10000)->Arg(100000);

static void BM_FitGbt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix x = random_features(n, 8, 7);
  Matrix xv = random_features(n / 5, 8, 9);
  Rng rng(11);
  std::vector<double> y(n), yv(xv.rows);
  for (std::size_t i = 0; i < n; ++i) y[i] = x(i, 0) + 0.3 * rng.normal();
  for (std::size_t i = 0; i < xv.rows; ++i)
    yv[i] = xv(i, 0) + 0.3 * rng.normal();

  GbtParams params;
  params.n_estimators = 100;
  for (auto _ : state) {
    GbtEnsemble e = fit_gbt(x, y, xv, yv, params);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_FitGbt)->Arg(10000)->Unit(benchmark::kMillisecond);
