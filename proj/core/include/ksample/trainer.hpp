#ifndef KSAMPLE_TRAINER_HPP_
#define KSAMPLE_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ksample/aggregators.hpp"
#include "ksample/environment.hpp"
#include "ksample/estimators.hpp"
#include "ksample/oracle.hpp"
#include "ksample/policy.hpp"

namespace ksample {

enum class EvalMode {
  kExact,    // oracle metrics
  kSampled,  // Monte Carlo metrics from eval_samples draws per prompt
};

struct TrainConfig {
  EstimatorKind estimator = EstimatorKind::loo();
  AggregatorKind aggregator = AggregatorKind::max();
  std::size_t k = 4;
  double learning_rate = 1.0;
  std::size_t steps = 1000;
  std::size_t batch_prompts = 1;
  std::size_t eval_every = 10;
  std::vector<std::size_t> eval_ks = {1, 4, 8};
  std::uint64_t seed = 0;

  // PPO / GRPO: gradient steps per sampled batch against the same old policy.
  std::size_t ppo_epochs = 1;
  // PPO value baseline step size; unset means learning_rate.
  std::optional<double> value_learning_rate;

  EvalMode eval_mode = EvalMode::kExact;
  std::size_t eval_samples = 1000;
  // Monte Carlo draws used when exact majority evaluation is over budget.
  std::size_t majority_mc_samples = 100'000;
  // When false, an over-budget exact majority evaluation throws ResourceError.
  bool monte_carlo_fallback = true;
  EnumerationBudget budget;

  // Throws ArgumentError describing the first invalid field.
  void validate() const;
};

struct MetricsRecord {
  std::size_t step = 0;
  double mean_reward = 0.0;
  std::map<std::size_t, double> pass_at;
  std::optional<std::map<std::size_t, double>> majority_at;
  double kl = 0.0;
  std::int64_t wallclock_ms = 0;
  // True when a majority metric came from Monte Carlo rather than enumeration.
  bool majority_estimated = false;

  // Equality of every metric, ignoring wallclock_ms.
  bool same_metrics(const MetricsRecord& other) const;
};

using MetricsLog = std::vector<MetricsRecord>;

struct EvalOptions {
  EvalMode mode = EvalMode::kExact;
  std::size_t eval_samples = 1000;
  std::size_t majority_mc_samples = 100'000;
  bool monte_carlo_fallback = true;
  EnumerationBudget budget;
  std::uint64_t seed = 0;  // Monte Carlo stream (sampled mode / fallback)
};

// Metrics of `params` on `env`; KL is measured against `reference`.
MetricsRecord evaluate(const PolicyParams& params, const PolicyParams& reference,
                       const Environment& env, const std::vector<std::size_t>& eval_ks,
                       const EvalOptions& options = {});

// Unbiased estimate of E[max of k] from n >= k i.i.d. reward samples.
double sampled_pass_at_k(std::vector<double> rewards, std::size_t k);

struct TrainResult {
  PolicyParams params;
  MetricsLog log;
  ValueBaseline value;
};

// Online policy optimisation: every step draws batch_prompts prompts
// uniformly, k actions for each, forms the estimator gradient averaged over
// the prompt batch and ascends theta <- theta + lr * g. Metrics are recorded
// at step 0, every eval_every updates and after the final update.
TrainResult train(const TrainConfig& config, const Environment& env,
                  const PolicyParams& init);

}  // namespace ksample

#endif  // KSAMPLE_TRAINER_HPP_
