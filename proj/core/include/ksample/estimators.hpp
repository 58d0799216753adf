#ifndef KSAMPLE_ESTIMATORS_HPP_
#define KSAMPLE_ESTIMATORS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ksample/aggregators.hpp"
#include "ksample/matrix.hpp"
#include "ksample/policy.hpp"

namespace ksample {

enum class EstimatorTag { kNaive, kLoo, kDemeaned, kLeavePOut, kPpo, kGrpo };

// Per-sample scalar R_i fed into the PPO / GRPO advantage.
enum class EffectiveReward { kMean, kPassK, kBiasedPassK };

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::kLoo;
  std::size_t p = 1;  // leave-p-out subset size
  EffectiveReward variant = EffectiveReward::kMean;
  double epsilon = 0.2;  // PPO ratio clip
  double alpha = 0.2;    // value clip
  bool normalize_std = false;

  static EstimatorKind naive() { return {EstimatorTag::kNaive}; }
  static EstimatorKind loo() { return {EstimatorTag::kLoo}; }
  static EstimatorKind demeaned() { return {EstimatorTag::kDemeaned}; }
  static EstimatorKind leave_p_out(std::size_t p) {
    EstimatorKind e{EstimatorTag::kLeavePOut};
    e.p = p;
    return e;
  }
  static EstimatorKind ppo(EffectiveReward variant, double epsilon = 0.2,
                           double alpha = 0.2) {
    EstimatorKind e{EstimatorTag::kPpo};
    e.variant = variant;
    e.epsilon = epsilon;
    e.alpha = alpha;
    return e;
  }
  static EstimatorKind grpo(EffectiveReward variant, bool normalize_std,
                            double epsilon = 0.2) {
    EstimatorKind e{EstimatorTag::kGrpo};
    e.variant = variant;
    e.normalize_std = normalize_std;
    e.epsilon = epsilon;
    return e;
  }

  std::string name() const;
  // Checks parameter ranges, and p against k when k is given.
  void validate(std::size_t k = 0) const;
  bool operator==(const EstimatorKind&) const = default;
};

std::string to_string(EffectiveReward variant);

// Per-prompt value baseline V(x) used by PPO.
struct ValueBaseline {
  std::vector<double> v;

  static ValueBaseline zeros(std::size_t n_prompts) {
    return {std::vector<double>(n_prompts, 0.0)};
  }
  double at(PromptId prompt) const;
};

// f(y) * sum_i grad log pi(y_i): coupled REINFORCE.
GradientTensor estimate_naive(const AggregatorKind& kind, const SampleBatch& batch,
                              const PolicyParams& params);

// sum_i (f(y) - f(y_{-i})) grad log pi(y_i).
GradientTensor estimate_loo(const AggregatorKind& kind, const SampleBatch& batch,
                            const PolicyParams& params);

// sum_i (A_i - mean A) grad log pi(y_i).
GradientTensor estimate_demeaned(const AggregatorKind& kind, const SampleBatch& batch,
                                 const PolicyParams& params);

// Leave-p-out gradient for the max aggregator:
//   1/C(k-1, p-1) * sum_{|s|=p} (sum_{i in s} grad log pi(y_i)) (A_s - mean A),
// with A_s = max_i r_i - max_{i not in s} r_i. Other aggregators are rejected.
GradientTensor estimate_leave_p_out(const AggregatorKind& kind, const SampleBatch& batch,
                                    const PolicyParams& params, std::size_t p);

// Per-sample weights w_i of the leave-p-out estimator, so that the gradient is
// sum_i w_i grad log pi(y_i).
std::vector<double> leave_p_out_weights(std::span<const double> rewards, std::size_t p);

std::vector<double> effective_reward(EffectiveReward variant,
                                     std::span<const double> rewards);

// Gradient of (1/k) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) with
// rho_i = pi(y_i)/pi_old(y_i) and A_i = R_i - V(x), advantages held constant.
GradientTensor ppo_step_grad(const SampleBatch& batch, const PolicyParams& params_old,
                             const PolicyParams& params, const ValueBaseline& value,
                             EffectiveReward variant, double epsilon);

// d/dV of (1/2) mean_i max((V - R_i)^2, (clip(V, V_old - a, V_old + a) - R_i)^2).
double value_loss_grad(const ValueBaseline& value, PromptId prompt,
                       std::span<const double> returns, const ValueBaseline& value_old,
                       double alpha);

// The clipped value loss itself (used for finite-difference checks).
double value_loss(double v, std::span<const double> returns, double v_old, double alpha);

// PPO surrogate gradient with A_i = R_i (no value model), optionally divided
// by the population standard deviation of R; if that deviation is below 1e-8
// all advantages are set to zero.
GradientTensor grpo_step_grad(const SampleBatch& batch, const PolicyParams& params_old,
                              const PolicyParams& params, EffectiveReward variant,
                              bool normalize_std, double epsilon);

inline constexpr double kStdGuard = 1e-8;

// On-policy dispatch: PPO/GRPO use params as the old policy and a zero value.
GradientTensor estimate(const EstimatorKind& estimator, const AggregatorKind& kind,
                        const SampleBatch& batch, const PolicyParams& params);

}  // namespace ksample

#endif  // KSAMPLE_ESTIMATORS_HPP_
