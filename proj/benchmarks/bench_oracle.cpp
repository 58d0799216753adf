#include <benchmark/benchmark.h>

#include "ksample/ksample.hpp"

namespace {

using namespace ksample;

void BM_ExactGradientEnumeration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const Environment env = build_gaussian_bandit(n, 5);
  const PolicyParams params = PolicyParams::uniform(1, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_gradient(AggregatorKind::max(), params, env, k));
  }
  state.counters["tuples"] = static_cast<double>(tuple_count(n, k, 1));
}
BENCHMARK(BM_ExactGradientEnumeration)->Args({5, 3})->Args({8, 4})->Args({10, 5});

void BM_ClosedFormPassAtK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Environment env = build_gaussian_bandit(n, 5);
  const PolicyParams params = PolicyParams::uniform(1, n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_pass_at_k(params, env, 8));
}
BENCHMARK(BM_ClosedFormPassAtK)->RangeMultiplier(10)->Range(10, 100000);

void BM_MajorityCountVectors(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Environment env = build_labeled_bandit(50, 5, 9);
  const PolicyParams params = PolicyParams::uniform(1, 50);
  for (auto _ : state) benchmark::DoNotOptimize(exact_majority_accuracy(params, env, k));
}
BENCHMARK(BM_MajorityCountVectors)->Arg(4)->Arg(8)->Arg(16);

}  // namespace
