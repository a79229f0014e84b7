#include <benchmark/benchmark.h>

#include <random>

#include "qrestrict/invariants.hpp"
#include "qrestrict/jacobian.hpp"
#include "qrestrict/numerics.hpp"
#include "qrestrict/surface.hpp"

using namespace qr;

namespace {
const char* kPair = "d=3 n=2\nQ1 = x1^2\nQ2 = x2^2 + x1*x3";
const char* kMixed = "d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2";
}  // namespace

static void BM_BoxEvalPair(benchmark::State& st) {
  auto q = parse_surface(kPair).tuple;
  BoxEvaluator ev(q, Box{{0, 0, 0}, {1, 1.0 / 8, 1}});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<std::vector<double>> xs(256, std::vector<double>(5));
  for (auto& x : xs)
    for (auto& v : x) v = u(rng);
  size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(ev.eval(xs[i++ % xs.size()]));
}
BENCHMARK(BM_BoxEvalPair);

static void BM_FastEval(benchmark::State& st) {
  auto q = parse_surface(kMixed).tuple;
  const int N = static_cast<int>(st.range(0));
  auto f = GridFunction::random(2, {N, N}, 3);
  TensorGrid g;
  for (int k = 0; k < 4; ++k) g.axes.push_back({-0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.2, 0.4});
  for (auto _ : st) benchmark::DoNotOptimize(extension_eval_fast(q, f, g));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_FastEval)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_DpRatioMixed(benchmark::State& st) {
  auto q = parse_surface(kMixed).tuple;
  const double R = static_cast<double>(st.range(0));
  Box b{{0, 0}, {1 / R, 1}};
  for (auto _ : st) benchmark::DoNotOptimize(dp_ratio(q, b, R, 4.5));
}
BENCHMARK(BM_DpRatioMixed)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DInvariantPair(benchmark::State& st) {
  auto q = parse_surface(kPair).tuple;
  for (auto _ : st) benchmark::DoNotOptimize(d_invariant(q, 2, 2));
}
BENCHMARK(BM_DInvariantPair)->Unit(benchmark::kMillisecond);

static void BM_JacobianCycle(benchmark::State& st) {
  auto q = parse_surface("d=4 n=4\nQ1 = x1*x2\nQ2 = x2*x3\nQ3 = x3*x4\nQ4 = x4*x1").tuple;
  for (auto _ : st) benchmark::DoNotOptimize(jacobian_poly(q, {}));
}
BENCHMARK(BM_JacobianCycle);
BENCHMARK_MAIN();
