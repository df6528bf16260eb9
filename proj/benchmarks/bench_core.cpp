#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "roughpath/laplace.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/rough_integral.hpp"
#include "roughpath/taylor.hpp"
#include "roughpath/variation.hpp"

using namespace roughpath;

namespace {

TruncatedTensor random_tensor(int d, int level, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(d);
  for (auto& x : v) x = g(rng);
  return TruncatedTensor::segment(v, level);
}

GridPath sine_path(std::size_t n, int d) {
  return GridPath::sample(uniform_grid(n), d, [d](double t, std::span<double> v) {
    for (int c = 0; c < d; ++c) v[c] = std::sin((c + 2) * t) + 0.3 * c * t;
  });
}

CoefficientPtr two_plus_sin() { return make_ridge(1, 1, 1, {{0, 0, 2.0, 1.0, RidgeShape::kSin, {1.0}, 0.0}}); }

}  // namespace

static void BM_TensorProduct(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0)), level = static_cast<int>(state.range(1));
  const auto a = random_tensor(d, level, 1), b = random_tensor(d, level, 2);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_TensorProduct)->ArgsProduct({{2, 4}, {2, 3, 4}});

static void BM_Lift(benchmark::State& state) {
  const auto path = sine_path(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(lift_piecewise_linear(path, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Lift)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oN);

static void BM_PvarNorm(benchmark::State& state) {
  const auto rp = lift_piecewise_linear(sine_path(state.range(0), 2), 2);
  for (auto _ : state) benchmark::DoNotOptimize(pvar_norm(rp, 2, 2.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PvarNorm)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

static void BM_RoughIntegral(benchmark::State& state) {
  const auto x = lift_piecewise_linear(sine_path(state.range(0), 1), 3);
  const auto f = make_ridge(1, 1, 1, {{0, 0, 0, 1, RidgeShape::kCos, {1.0}, 0}});
  for (auto _ : state) benchmark::DoNotOptimize(integrate(*f, x));
}
BENCHMARK(BM_RoughIntegral)->Arg(256)->Arg(1024);

static void BM_RdeSolve(benchmark::State& state) {
  const auto x = lift_piecewise_linear(sine_path(state.range(0), 1), 3);
  const auto f = make_clamped(make_ridge(1, 1, 1, {{0, 0, 0, 1, RidgeShape::kCosSquared, {1.0}, 0}}), 10.0);
  const std::vector<double> y0{0.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve(f, x, y0));
}
BENCHMARK(BM_RdeSolve)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_BrownianSample(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_brownian_rough_path(2, static_cast<int>(state.range(0)), ++seed, 2));
}
BENCHMARK(BM_BrownianSample)->Arg(7)->Arg(10);

static void BM_ExpandAndRemainder(benchmark::State& state) {
  const std::size_t n = 256;
  const auto x = lift_piecewise_linear(sine_path(n, 1), 3);
  const auto lam = GridPath::sample(uniform_grid(n), 1, [](double, std::span<double> v) { v[0] = 0.0; });
  const auto zero = make_constant(1, 1, 1, {0.0});
  const std::vector<double> y0{0.0};
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto e = expand(two_plus_sin(), zero, x, lam, y0, order);
    benchmark::DoNotOptimize(remainder(two_plus_sin(), zero, e, 0.125).q_sup());
  }
}
BENCHMARK(BM_ExpandAndRemainder)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
