#include "ksample/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample {

namespace {

constexpr std::uint64_t kPromptStream = 0x70726f6d7074ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

bool is_surrogate(const EstimatorKind& e) {
  return e.tag == EstimatorTag::kPpo || e.tag == EstimatorTag::kGrpo;
}

}  // namespace

void TrainConfig::validate() const {
  if (k == 0) throw ArgumentError("k must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning_rate must be finite and non-negative");
  }
  if (steps == 0) throw ArgumentError("steps must be positive");
  if (batch_prompts == 0) throw ArgumentError("batch_prompts must be positive");
  if (eval_every == 0) throw ArgumentError("eval_every must be positive");
  if (eval_ks.empty()) throw ArgumentError("eval_ks must not be empty");
  for (std::size_t ek : eval_ks) {
    if (ek == 0) throw ArgumentError("eval_ks entries must be positive");
  }
  if (ppo_epochs == 0) throw ArgumentError("ppo_epochs must be positive");
  if (value_learning_rate && !(*value_learning_rate >= 0.0)) {
    throw ArgumentError("value_learning_rate must be non-negative");
  }
  if (eval_mode == EvalMode::kSampled) {
    const std::size_t max_k = *std::max_element(eval_ks.begin(), eval_ks.end());
    if (eval_samples < std::max<std::size_t>(2, max_k)) {
      throw ArgumentError("eval_samples must be at least the largest eval k");
    }
  }
  aggregator.validate();
  estimator.validate(k);
  if (estimator.tag == EstimatorTag::kLeavePOut && aggregator.tag != AggregatorTag::kMax) {
    throw ArgumentError("leave_p_out estimator requires the max aggregator");
  }
}

bool MetricsRecord::same_metrics(const MetricsRecord& o) const {
  return step == o.step && mean_reward == o.mean_reward && pass_at == o.pass_at &&
         majority_at == o.majority_at && kl == o.kl &&
         majority_estimated == o.majority_estimated;
}

double sampled_pass_at_k(std::vector<double> rewards, std::size_t k) {
  const std::size_t n = rewards.size();
  if (k == 0 || n < k) throw ArgumentError("sampled_pass_at_k: need 1 <= k <= n");
  std::sort(rewards.begin(), rewards.end());
  // P(sample j is the max of a random k-subset) = C(j-1, k-1) / C(n, k).
  const double log_denom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                           std::lgamma(static_cast<double>(n - k) + 1.0);
  CompensatedSum s;
  for (std::size_t j = k; j <= n; ++j) {
    const double log_num = std::lgamma(static_cast<double>(j)) - std::lgamma(static_cast<double>(k)) -
                           std::lgamma(static_cast<double>(j - k) + 1.0);
    s.add(rewards[j - 1] * std::exp(log_num - log_denom));
  }
  return s.value();
}

MetricsRecord evaluate(const PolicyParams& params, const PolicyParams& reference,
                       const Environment& env, const std::vector<std::size_t>& eval_ks,
                       const EvalOptions& options) {
  if (eval_ks.empty()) throw ArgumentError("evaluate: eval_ks must not be empty");
  MetricsRecord rec;
  rec.kl = kl_to_reference(params, reference);
  if (env.has_labels()) rec.majority_at.emplace();

  if (options.mode == EvalMode::kExact) {
    rec.mean_reward = exact_mean_reward(params, env);
    for (std::size_t ek : eval_ks) {
      rec.pass_at[ek] = exact_pass_at_k(params, env, ek);
      if (!rec.majority_at) continue;
      try {
        (*rec.majority_at)[ek] = exact_majority_accuracy(params, env, ek, options.budget);
      } catch (const ResourceError&) {
        if (!options.monte_carlo_fallback) throw;
        Rng rng = Rng::substream(options.seed, {kEvalStream, ek});
        (*rec.majority_at)[ek] =
            monte_carlo_majority_accuracy(params, env, ek, options.majority_mc_samples, rng)
                .mean;
        rec.majority_estimated = true;
      }
    }
    return rec;
  }

  // Sampled evaluation: eval_samples draws per prompt.
  CompensatedSum mean;
  std::map<std::size_t, CompensatedSum> pass;
  std::map<std::size_t, CompensatedSum> maj;
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    Rng rng = Rng::substream(options.seed, {kEvalStream, x});
    const auto actions = sample_actions(params, x, options.eval_samples, rng);
    const SampleBatch b = make_batch(env, x, actions);
    mean.add(mean_of(b.rewards));
    for (std::size_t ek : eval_ks) {
      pass[ek].add(sampled_pass_at_k(b.rewards, ek));
      if (!rec.majority_at) continue;
      CompensatedSum m;
      const std::size_t groups = options.eval_samples / ek;
      for (std::size_t gi = 0; gi < groups; ++gi) {
        SampleBatch g;
        g.prompt = x;
        g.actions.assign(b.actions.begin() + gi * ek, b.actions.begin() + (gi + 1) * ek);
        g.rewards.assign(b.rewards.begin() + gi * ek, b.rewards.begin() + (gi + 1) * ek);
        g.labels.emplace(b.labels->begin() + gi * ek, b.labels->begin() + (gi + 1) * ek);
        m.add(aggregate(AggregatorKind::majority(), g));
      }
      maj[ek].add(m.value() / static_cast<double>(groups));
    }
  }
  const double n = static_cast<double>(env.n_prompts());
  rec.mean_reward = mean.value() / n;
  for (std::size_t ek : eval_ks) {
    rec.pass_at[ek] = pass[ek].value() / n;
    if (rec.majority_at) (*rec.majority_at)[ek] = maj[ek].value() / n;
  }
  rec.majority_estimated = rec.majority_at.has_value();
  return rec;
}

TrainResult train(const TrainConfig& config, const Environment& env,
                  const PolicyParams& init) {
  config.validate();
  if (init.n_prompts() != env.n_prompts() || init.n_actions() != env.n_actions()) {
    throw ArgumentError("train: initial policy does not match the environment shape");
  }
  if (config.aggregator.tag == AggregatorTag::kMajority && !env.has_labels()) {
    throw ArgumentError("train: majority aggregator needs a labelled environment");
  }

  const auto start = std::chrono::steady_clock::now();
  const PolicyParams reference = init;
  PolicyParams params = init;
  ValueBaseline value = ValueBaseline::zeros(env.n_prompts());
  const double value_lr = config.value_learning_rate.value_or(config.learning_rate);

  EvalOptions eval_opts;
  eval_opts.mode = config.eval_mode;
  eval_opts.eval_samples = config.eval_samples;
  eval_opts.majority_mc_samples = config.majority_mc_samples;
  eval_opts.monte_carlo_fallback = config.monte_carlo_fallback;
  eval_opts.budget = config.budget;

  MetricsLog log;
  auto record = [&](std::size_t step) {
    eval_opts.seed = derive_seed(config.seed, {kEvalStream, step});
    MetricsRecord rec = evaluate(params, reference, env, config.eval_ks, eval_opts);
    rec.step = step;
    rec.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    log.push_back(std::move(rec));
  };

  record(0);
  const double inv_batch = 1.0 / static_cast<double>(config.batch_prompts);
  for (std::size_t t = 0; t < config.steps; ++t) {
    Rng prompt_rng = Rng::substream(config.seed, {kPromptStream, t});
    std::vector<SampleBatch> batches;
    batches.reserve(config.batch_prompts);
    for (std::size_t slot = 0; slot < config.batch_prompts; ++slot) {
      const PromptId x =
          env.n_prompts() == 1 ? 0 : prompt_rng.uniform_index(env.n_prompts());
      Rng rng = Rng::substream(config.seed, {t, slot, x});
      batches.push_back(make_batch(env, x, sample_actions(params, x, config.k, rng)));
    }

    if (!is_surrogate(config.estimator)) {
      GradientAccumulator acc(params.n_prompts(), params.n_actions());
      for (const auto& b : batches) {
        acc.add(estimate(config.estimator, config.aggregator, b, params), inv_batch);
      }
      params.ascend(acc.result(), config.learning_rate);
    } else {
      const PolicyParams params_old = params;
      const ValueBaseline value_old = value;
      const bool use_value = config.estimator.tag == EstimatorTag::kPpo;
      for (std::size_t epoch = 0; epoch < config.ppo_epochs; ++epoch) {
        GradientAccumulator acc(params.n_prompts(), params.n_actions());
        std::vector<CompensatedSum> value_grad(env.n_prompts());
        for (const auto& b : batches) {
          if (use_value) {
            acc.add(ppo_step_grad(b, params_old, params, value, config.estimator.variant,
                                  config.estimator.epsilon),
                    inv_batch);
            const auto returns = effective_reward(config.estimator.variant, b.rewards);
            value_grad[b.prompt].add(
                inv_batch * value_loss_grad(value, b.prompt, returns, value_old,
                                            config.estimator.alpha));
          } else {
            acc.add(grpo_step_grad(b, params_old, params, config.estimator.variant,
                                   config.estimator.normalize_std,
                                   config.estimator.epsilon),
                    inv_batch);
          }
        }
        params.ascend(acc.result(), config.learning_rate);
        if (use_value) {
          for (PromptId x = 0; x < env.n_prompts(); ++x) {
            value.v[x] -= value_lr * value_grad[x].value();
          }
        }
      }
    }

    const std::size_t done = t + 1;
    if (done % config.eval_every == 0 || done == config.steps) record(done);
  }
  return {std::move(params), std::move(log), std::move(value)};
}

}  // namespace ksample
