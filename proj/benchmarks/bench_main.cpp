#include <benchmark/benchmark.h>

#include <random>

#include "ifsrecur/garsia_algebra.hpp"
#include "ifsrecur/ifs_core.hpp"
#include "ifsrecur/measure_lab.hpp"
#include "ifsrecur/pixel_mask.hpp"
#include "ifsrecur/transversality_mc.hpp"

using namespace ifsrecur;

namespace {

AffineIFS plane(int m) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<AffineMap> maps;
  for (int i = 0; i < m; ++i) {
    Mat a(2, 2);
    a << 0.4, 0.1 * u(rng), 0.1 * u(rng), 0.35;
    Vec t(2);
    t << u(rng), u(rng);
    maps.push_back({a, t});
  }
  return AffineIFS(std::move(maps));
}

std::vector<Mat> diag_family(double a, int m) {
  Mat d(1, 1);
  d(0, 0) = a;
  return std::vector<Mat>(static_cast<std::size_t>(m), d);
}

}  // namespace

static void BM_ComposeAllWords(benchmark::State& state) {
  const AffineIFS ifs = plane(3);
  const auto n = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    double acc = 0.0;
    for_each_composed(ifs, n, kDefaultWordBudget, [&](const Word&, const AffineMap& f) { acc += f.translation(0); });
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(std::pow(3.0, n)));
}
BENCHMARK(BM_ComposeAllWords)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

static void BM_SeparationScan(benchmark::State& state) {
  const double lambda = 1.0 / 1.0816184;
  for (auto _ : state) benchmark::DoNotOptimize(separation_min(lambda, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SeparationScan)->DenseRange(8, 14, 2)->Unit(benchmark::kMillisecond);

static void BM_Rasterize2D(benchmark::State& state) {
  const AffineIFS ifs = plane(4);
  const auto spec = TargetSpec::shrinking_ball(HFamily::constant(1.0), SymbolicSequence::parse("(0)"));
  const auto bodies = stage_bodies(ifs, spec, 5);
  const Window w = bounding_window(bodies, 0.01);
  const auto res = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(bodies, w, {res, res}).occupied_count());
}
BENCHMARK(BM_Rasterize2D)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);

static void BM_PairStatistic(benchmark::State& state) {
  const auto mats = diag_family(0.45, 2);
  const auto p = sample_translations(2, 1, 1.0, 1, 7)[0];
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pair_overlap_statistic(mats, p, SymbolicSequence::parse("(0)"), n, 0.2));
  }
}
BENCHMARK(BM_PairStatistic)->DenseRange(4, 8, 2);
BENCHMARK_MAIN();
