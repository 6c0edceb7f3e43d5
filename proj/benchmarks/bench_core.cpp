#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "chainlab/concentration.hpp"
#include "chainlab/metric.hpp"
#include "chainlab/rng.hpp"
#include "chainlab/spinglass.hpp"
#include "chainlab/transport.hpp"

using namespace chainlab;

namespace {

metric::FiniteMetricSpace cloud(std::size_t n) {
  Philox4x32 g(1, 0);
  Eigen::MatrixXd p(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = g.normal();
  return metric::euclidean_space(p);
}

void BM_ExactCover(benchmark::State& state) {
  const auto space = cloud(static_cast<std::size_t>(state.range(0)));
  const double eps = 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(metric::covering_number(space, eps, metric::CoverMode::exact));
}
BENCHMARK(BM_ExactCover)->Arg(12)->Arg(18)->Arg(24);

void BM_EntropyProfile(benchmark::State& state) {
  const auto space = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metric::entropy_profile(space, metric::CoverMode::exact));
}
BENCHMARK(BM_EntropyProfile)->Arg(12)->Arg(16);

void BM_GrayCodeLogZ(benchmark::State& state) {
  const auto s = spinglass::SKInstance::random(static_cast<std::size_t>(state.range(0)), 0.0, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(spinglass::log_partition_exact(s, 0.5));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_GrayCodeLogZ)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_NaiveLogZ(benchmark::State& state) {
  const auto s = spinglass::SKInstance::random(static_cast<std::size_t>(state.range(0)), 0.0, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(spinglass::log_partition_naive(s, 0.5));
}
BENCHMARK(BM_NaiveLogZ)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ConvexDistanceTable(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Philox4x32 g(2, 0);
  std::vector<concentration::Point> a;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    if (g.uniform() < 0.2) {
      concentration::Point p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = static_cast<std::uint8_t>((i >> k) & 1U);
      a.push_back(p);
    }
  }
  const auto inst = concentration::ProductSpaceInstance::uniform(2, n, a);
  for (auto _ : state) benchmark::DoNotOptimize(concentration::convex_distance_table(inst));
}
BENCHMARK(BM_ConvexDistanceTable)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_T2Check(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  const double L = 8, h = 2 * L / static_cast<double>(m - 1);
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = std::exp(0.5 * (-L + h * static_cast<double>(i)));
  for (auto _ : state) benchmark::DoNotOptimize(transport::t2_check(f, m, L));
}
BENCHMARK(BM_T2Check)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
