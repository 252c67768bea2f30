#include <benchmark/benchmark.h>

#include <random>

#include "lemni/extremal.hpp"
#include "lemni/levelset.hpp"
#include "lemni/measure.hpp"
#include "lemni/poly.hpp"

namespace {

std::vector<lemni::Cplx> random_roots(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<lemni::Cplx> roots(d);
  for (auto& r : roots) r = {u(rng), u(rng)};
  return roots;
}

void BM_RootSolve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p = lemni::MonicPolynomial::from_roots(random_roots(d, 7));
  const auto coeffs = p.coefficients();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lemni::solve_polynomial(coeffs));
  }
}
BENCHMARK(BM_RootSolve)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_Trace(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p =
      lemni::MonicPolynomial::from_roots(lemni::power_candidate_roots(d));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lemni::trace(p));
  }
}
BENCHMARK(BM_Trace)->Arg(2)->Arg(4)->Arg(6);

void BM_LengthIntegral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p =
      lemni::MonicPolynomial::from_roots(lemni::power_candidate_roots(d));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lemni::length_integral(p, 1e-6));
  }
}
BENCHMARK(BM_LengthIntegral)->Arg(2)->Arg(4)->Arg(6);

void BM_Crofton(benchmark::State& state) {
  const auto p = lemni::MonicPolynomial::from_roots(random_roots(4, 11));
  const auto curve = lemni::trace(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lemni::crofton_length(curve, 256, 256));
  }
}
BENCHMARK(BM_Crofton);

}  // namespace

BENCHMARK_MAIN();
