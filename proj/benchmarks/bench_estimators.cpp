#include <benchmark/benchmark.h>

#include "ksample/ksample.hpp"

namespace {

using namespace ksample;

struct Setup {
  Environment env;
  PolicyParams params;
  SampleBatch batch;
};

Setup make_setup(std::size_t n_actions, std::size_t k) {
  Environment env = build_gaussian_bandit(n_actions, 7);
  PolicyParams params = PolicyParams::uniform(1, n_actions);
  Rng rng(11);
  SampleBatch batch = make_batch(env, 0, sample_actions(params, 0, k, rng));
  return {std::move(env), std::move(params), std::move(batch)};
}

void BM_Estimator(benchmark::State& state, EstimatorKind est, AggregatorKind agg) {
  const auto s = make_setup(100, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate(est, agg, s.batch, s.params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK_CAPTURE(BM_Estimator, loo_mean, EstimatorKind::loo(), AggregatorKind::mean())
    ->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Estimator, loo_max, EstimatorKind::loo(), AggregatorKind::max())
    ->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Estimator, demeaned_max, EstimatorKind::demeaned(), AggregatorKind::max())
    ->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Estimator, loo_softmax, EstimatorKind::loo(), AggregatorKind::softmax(2.0))
    ->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Estimator, leave_2_out_max, EstimatorKind::leave_p_out(2),
                  AggregatorKind::max())
    ->RangeMultiplier(2)->Range(4, 16);

void BM_Sampling(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PolicyParams params = PolicyParams::uniform(1, n);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_actions(params, 0, 8, rng));
}
BENCHMARK(BM_Sampling)->RangeMultiplier(10)->Range(10, 10000);

}  // namespace
