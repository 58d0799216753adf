#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

namespace ksample {
namespace {

using testing::reward_batch;
using testing::row_policy;

PolicyParams random_row(Rng& rng, std::size_t n) {
  std::vector<double> l(n);
  for (double& x : l) x = 2.0 * rng.normal();
  return row_policy(l);
}

SampleBatch random_batch(Rng& rng, const PolicyParams& params, std::size_t k) {
  SampleBatch b;
  b.actions = sample_actions(params, 0, k, rng);
  for (std::size_t i = 0; i < k; ++i) b.rewards.push_back(rng.normal());
  return b;
}

TEST(EstimateNaive, ZeroWhenAggregateIsZero) {
  const auto params = row_policy({0.2, -0.4, 1.0});
  EXPECT_TRUE(estimate_naive(AggregatorKind::max(), reward_batch({0.0, -1.0, 0.0}), params)
                  .is_zero());
}

TEST(EstimateNaive, SingleSampleMeanIsReinforce) {
  const auto params = row_policy({0.2, -0.4, 1.0});
  SampleBatch b;
  b.actions = {1};
  b.rewards = {2.5};
  const auto g = estimate_naive(AggregatorKind::mean(), b, params);
  EXPECT_LT(max_abs_diff(g, logprob_grad(params, 0, 1) * 2.5), 1e-15);
}

TEST(EstimateNaive, MonteCarloMeanMatchesOracle) {
  const auto params = row_policy({0.3, -0.2, 0.8, 0.0});
  const auto env = testing::single_prompt_env({0.0, 1.0, 0.4, 0.7});
  const auto kind = AggregatorKind::max();
  const std::size_t k = 3;
  const std::size_t n = 200'000;
  Rng rng(21);
  std::vector<CompensatedSum> s(4);
  std::vector<CompensatedSum> sq(4);
  for (std::size_t t = 0; t < n; ++t) {
    const auto g = estimate_naive(kind, make_batch(env, 0, sample_actions(params, 0, k, rng)),
                                  params);
    for (int a = 0; a < 4; ++a) {
      s[a].add(g(0, a));
      sq[a].add(g(0, a) * g(0, a));
    }
  }
  const auto truth = exact_gradient(kind, params, env, k);
  for (int a = 0; a < 4; ++a) {
    const double mean = s[a].value() / n;
    const double se = std::sqrt((sq[a].value() / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - truth(0, a)), 3.0 * se) << "component " << a;
  }
}

TEST(EstimateLoo, ZeroOnEqualRewards) {
  const auto params = row_policy({0.2, -0.4, 1.0});
  for (const auto& kind : {AggregatorKind::mean(), AggregatorKind::max(),
                           AggregatorKind::softmax(2.0)}) {
    EXPECT_TRUE(estimate_loo(kind, reward_batch({0.7, 0.7, 0.7}, 3), params).is_zero());
  }
}

TEST(EstimateLoo, MaxTouchesAtMostOneSample) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto params = random_row(rng, 5);
    const auto b = random_batch(rng, params, 4);
    const auto a = advantages(AggregatorKind::max(), b);
    int nonzero = 0;
    for (std::size_t i = 0; i < 4; ++i) nonzero += a[i] != 0.0 ? 1 : 0;
    EXPECT_LE(nonzero, 1);
  }
}

TEST(EstimateLoo, ExpectationMatchesOracleOnSmallMaxInstance) {
  const auto params = PolicyParams::uniform(1, 3);
  const auto env = testing::single_prompt_env({0.0, 1.0, 2.0});
  const auto kind = AggregatorKind::max();
  const auto e = exact_expectation_of(
      [&](const SampleBatch& b) { return estimate_loo(kind, b, params); }, params, env, 2);
  EXPECT_LT(max_abs_diff(e, exact_gradient(kind, params, env, 2)), 1e-10);
}

TEST(EstimateDemeaned, MatchesLooForMeanAggregator) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto params = random_row(rng, 4);
    const auto b = random_batch(rng, params, 2 + rng.uniform_index(5));
    EXPECT_LT(max_abs_diff(estimate_demeaned(AggregatorKind::mean(), b, params),
                           estimate_loo(AggregatorKind::mean(), b, params)),
              1e-12);
  }
}

TEST(EstimateDemeaned, MaxWeightsExample) {
  const auto params = row_policy({0.1, 0.5, -0.3, 0.9});
  const auto b = reward_batch({-1, -1, 1, -1});
  const std::vector<double> w{-0.5, -0.5, 1.5, -0.5};
  EXPECT_LT(max_abs_diff(estimate_demeaned(AggregatorKind::max(), b, params),
                         weighted_score(params, 0, b.actions, w)),
            1e-15);
}

TEST(EstimateDemeaned, ExpectationIsGradientOfOrderStatisticMix) {
  const auto params = row_policy({0.4, -0.1, 0.0, 0.9});
  const auto env = testing::single_prompt_env({0.2, 0.9, 0.5, 0.1});
  const std::size_t k = 3;
  const double kd = 3.0;
  const auto e = exact_expectation_of(
      [&](const SampleBatch& b) { return estimate_demeaned(AggregatorKind::max(), b, params); },
      params, env, k);
  // (k-1)/k * r_(k) + 1/k * r_(k-1), differentiated by enumeration.
  const auto target = exact_functional_gradient(
      [&](const SampleBatch& b) {
        std::vector<double> r = b.rewards;
        std::sort(r.begin(), r.end());
        return (kd - 1.0) / kd * r[k - 1] + r[k - 2] / kd;
      },
      params, env, k);
  EXPECT_LT(max_abs_diff(e, target), 1e-10);
}

TEST(EstimateLeavePOut, POneIsDemeanedMax) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto params = random_row(rng, 6);
    const auto b = random_batch(rng, params, 2 + rng.uniform_index(6));
    EXPECT_LT(max_abs_diff(estimate_leave_p_out(AggregatorKind::max(), b, params, 1),
                           estimate_demeaned(AggregatorKind::max(), b, params)),
              1e-12);
  }
}

TEST(EstimateLeavePOut, PKMinusOneIsUnbiasedForMean) {
  const auto params = row_policy({0.4, -0.1, 0.7});
  const auto env = testing::single_prompt_env({0.2, 0.9, 0.5});
  for (std::size_t k : {2u, 3u, 4u}) {
    const auto e = exact_expectation_of(
        [&](const SampleBatch& b) {
          return estimate_leave_p_out(AggregatorKind::max(), b, params, k - 1);
        },
        params, env, k);
    EXPECT_LT(max_abs_diff(e, exact_gradient(AggregatorKind::mean(), params, env, k)), 1e-10);
  }
}

TEST(EstimateLeavePOut, ZeroOnEqualRewardsAndRangeChecked) {
  const auto params = row_policy({0.1, 0.2, 0.3, 0.4});
  const auto b = reward_batch({0.5, 0.5, 0.5, 0.5});
  for (std::size_t p = 1; p < 4; ++p) {
    EXPECT_TRUE(estimate_leave_p_out(AggregatorKind::max(), b, params, p).is_zero());
  }
  EXPECT_THROW(estimate_leave_p_out(AggregatorKind::max(), b, params, 0), ArgumentError);
  EXPECT_THROW(estimate_leave_p_out(AggregatorKind::max(), b, params, 4), ArgumentError);
  EXPECT_THROW(estimate_leave_p_out(AggregatorKind::mean(), b, params, 1), ArgumentError);
}

TEST(EffectiveReward, Examples) {
  const std::vector<double> r{-1, 1, -1};
  EXPECT_EQ(effective_reward(EffectiveReward::kPassK, r), (std::vector<double>{0, 2, 0}));
  const auto biased = effective_reward(EffectiveReward::kBiasedPassK, r);
  EXPECT_NEAR(biased[0], -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(biased[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(biased[2], -2.0 / 3.0, 1e-15);
  EXPECT_EQ(effective_reward(EffectiveReward::kMean, r), r);
}

TEST(PpoStepGrad, RatioOneInsideClipIsScaledScore) {
  const auto params = row_policy({0.3, -0.5, 1.1});
  const auto b = reward_batch({0.4, 1.2, -0.3}, 3);
  const auto g = ppo_step_grad(b, params, params, ValueBaseline::zeros(1),
                               EffectiveReward::kMean, 0.2);
  const std::vector<double> w{0.4 / 3, 1.2 / 3, -0.3 / 3};
  EXPECT_LT(max_abs_diff(g, weighted_score(params, 0, b.actions, w)), 1e-15);
}

TEST(PpoStepGrad, ClippedSampleContributesNothing) {
  const auto old = row_policy({0.0, 0.0});
  const auto now = row_policy({1.0, 0.0});  // ratio of action 0 is about 1.46
  SampleBatch b;
  b.actions = {0};
  b.rewards = {1.0};
  EXPECT_TRUE(
      ppo_step_grad(b, old, now, ValueBaseline::zeros(1), EffectiveReward::kMean, 0.2).is_zero());
  b.rewards = {-1.0};  // negative advantage is not clipped on the high side
  EXPECT_FALSE(
      ppo_step_grad(b, old, now, ValueBaseline::zeros(1), EffectiveReward::kMean, 0.2).is_zero());
}

TEST(PpoStepGrad, ValueBaselineShiftsAdvantages) {
  const auto params = row_policy({0.3, -0.5});
  const auto b = reward_batch({1.0, 0.0}, 2);
  ValueBaseline v{{0.5}};
  const auto g = ppo_step_grad(b, params, params, v, EffectiveReward::kMean, 0.2);
  const std::vector<double> w{0.25, -0.25};
  EXPECT_LT(max_abs_diff(g, weighted_score(params, 0, b.actions, w)), 1e-15);
}

TEST(EstimatorKind, DefaultClipIsPointTwo) {
  const auto e = EstimatorKind::ppo(EffectiveReward::kPassK);
  EXPECT_EQ(e.epsilon, 0.2);
  EXPECT_EQ(e.alpha, 0.2);
  EXPECT_THROW(EstimatorKind::ppo(EffectiveReward::kMean, 0.0).validate(), ArgumentError);
}

TEST(ValueLoss, ZeroGradientAtOptimum) {
  const std::vector<double> r{0.7, 0.7, 0.7};
  ValueBaseline v{{0.7}};
  EXPECT_EQ(value_loss_grad(v, 0, r, v, 0.2), 0.0);
}

TEST(ValueLoss, InsideBandIsSquaredLossGradient) {
  const std::vector<double> r{0.0, 1.0, 2.0};
  ValueBaseline v{{0.6}};
  ValueBaseline old{{0.5}};
  EXPECT_NEAR(value_loss_grad(v, 0, r, old, 0.2), 0.6 - 1.0, 1e-15);
}

TEST(ValueLoss, MatchesFiniteDifferences) {
  Rng rng(8);
  const double eps = 1e-5;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> r(3);
    for (double& x : r) x = rng.normal();
    const double v_old = rng.normal();
    double v = v_old + 0.6 * rng.normal();
    // Stay away from the clip-band kinks where the loss is not differentiable.
    while (std::abs(std::abs(v - v_old) - 0.2) < 1e-3) v += 0.01;
    const double fd =
        (value_loss(v + eps, r, v_old, 0.2) - value_loss(v - eps, r, v_old, 0.2)) / (2 * eps);
    EXPECT_NEAR(value_loss_grad(ValueBaseline{{v}}, 0, r, ValueBaseline{{v_old}}, 0.2), fd, 1e-6);
  }
}

TEST(GrpoStepGrad, BiasedPassKWithoutStdIsDemeanedSurrogate) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto params = random_row(rng, 5);
    const auto b = random_batch(rng, params, 2 + rng.uniform_index(5));
    const auto eff = effective_reward(EffectiveReward::kBiasedPassK, b.rewards);
    std::vector<double> w(eff.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = eff[i] / static_cast<double>(b.k());
    const auto g = grpo_step_grad(b, params, params, EffectiveReward::kBiasedPassK, false, 0.2);
    EXPECT_LT(max_abs_diff(g, weighted_score(params, 0, b.actions, w)), 1e-12);
  }
}

TEST(GrpoStepGrad, StdGuardZeroesConstantRewards) {
  const auto params = row_policy({0.3, -0.5, 0.2});
  const auto b = reward_batch({0.4, 0.4, 0.4}, 3);
  EXPECT_TRUE(grpo_step_grad(b, params, params, EffectiveReward::kMean, true, 0.2).is_zero());
}

TEST(GrpoStepGrad, StdNormalisationDividesByPopulationStd) {
  const auto params = row_policy({0.3, -0.5});
  const auto b = reward_batch({1.0, -1.0}, 2);
  const auto plain = grpo_step_grad(b, params, params, EffectiveReward::kMean, false, 0.2);
  const auto scaled = grpo_step_grad(b, params, params, EffectiveReward::kMean, true, 0.2);
  EXPECT_LT(max_abs_diff(plain, scaled), 1e-15);  // population std of (1, -1) is 1
}

TEST(Estimate, DispatchMatchesDirectCalls) {
  const auto params = row_policy({0.3, -0.5, 0.9});
  const auto b = reward_batch({0.1, 0.8, 0.3}, 3);
  const auto kind = AggregatorKind::max();
  EXPECT_EQ(estimate(EstimatorKind::loo(), kind, b, params), estimate_loo(kind, b, params));
  EXPECT_EQ(estimate(EstimatorKind::naive(), kind, b, params), estimate_naive(kind, b, params));
  EXPECT_EQ(estimate(EstimatorKind::leave_p_out(2), kind, b, params),
            estimate_leave_p_out(kind, b, params, 2));
}

}  // namespace
}  // namespace ksample
