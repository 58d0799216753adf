#include <benchmark/benchmark.h>

#include "ksample/ksample.hpp"

namespace {

using namespace ksample;

// One 100-step run on a 100-arm bandit with per-step evaluation.
void BM_TrainLooMax(benchmark::State& state) {
  const Environment env = build_gaussian_bandit(100, 1);
  TrainConfig cfg;
  cfg.k = 4;
  cfg.steps = 100;
  cfg.learning_rate = 1.0;
  cfg.eval_ks = {1, 4};
  cfg.estimator = EstimatorKind::loo();
  cfg.aggregator = AggregatorKind::max();
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(cfg, env, PolicyParams::uniform(1, 100)));
  }
}
BENCHMARK(BM_TrainLooMax)->Unit(benchmark::kMillisecond);

}  // namespace
