#include "ksample/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample {

std::string to_string(EffectiveReward variant) {
  switch (variant) {
    case EffectiveReward::kMean:
      return "mean";
    case EffectiveReward::kPassK:
      return "pass_k";
    case EffectiveReward::kBiasedPassK:
      return "biased_pass_k";
  }
  return "unknown";
}

std::string EstimatorKind::name() const {
  std::ostringstream os;
  switch (tag) {
    case EstimatorTag::kNaive:
      return "naive";
    case EstimatorTag::kLoo:
      return "loo";
    case EstimatorTag::kDemeaned:
      return "demeaned";
    case EstimatorTag::kLeavePOut:
      os << "leave_p_out(" << p << ")";
      return os.str();
    case EstimatorTag::kPpo:
      os << "ppo(" << to_string(variant) << ")";
      return os.str();
    case EstimatorTag::kGrpo:
      os << "grpo(" << to_string(variant) << (normalize_std ? ",std" : "") << ")";
      return os.str();
  }
  return "unknown";
}

void EstimatorKind::validate(std::size_t k) const {
  if (tag == EstimatorTag::kPpo || tag == EstimatorTag::kGrpo) {
    if (!(epsilon > 0.0)) throw ArgumentError("estimator: epsilon must be positive");
    if (!(alpha > 0.0)) throw ArgumentError("estimator: alpha must be positive");
  }
  if (tag == EstimatorTag::kLeavePOut) {
    if (p < 1) throw ArgumentError("leave_p_out: p must be at least 1");
    if (k != 0 && p > k - 1) {
      throw ArgumentError("leave_p_out: p must be at most k - 1");
    }
  }
  const bool needs_pair = tag == EstimatorTag::kLoo || tag == EstimatorTag::kDemeaned ||
                          tag == EstimatorTag::kLeavePOut ||
                          ((tag == EstimatorTag::kPpo || tag == EstimatorTag::kGrpo) &&
                           variant != EffectiveReward::kMean);
  if (k != 0 && needs_pair && k < 2) {
    throw ArgumentError("estimator " + name() + " needs k >= 2");
  }
}

double ValueBaseline::at(PromptId prompt) const {
  if (prompt >= v.size()) throw IndexError("value baseline: prompt out of range");
  return v[prompt];
}

GradientTensor estimate_naive(const AggregatorKind& kind, const SampleBatch& batch,
                              const PolicyParams& params) {
  if (batch.k() < 1) throw ArgumentError("estimate_naive: needs k >= 1");
  const double f = aggregate(kind, batch);
  std::vector<double> w(batch.k(), f);
  return weighted_score(params, batch.prompt, batch.actions, w);
}

GradientTensor estimate_loo(const AggregatorKind& kind, const SampleBatch& batch,
                            const PolicyParams& params) {
  const AdvantageVector a = advantages(kind, batch);
  return weighted_score(params, batch.prompt, batch.actions, a.values);
}

GradientTensor estimate_demeaned(const AggregatorKind& kind, const SampleBatch& batch,
                                 const PolicyParams& params) {
  const AdvantageVector a = demeaned_advantages(kind, batch);
  return weighted_score(params, batch.prompt, batch.actions, a.values);
}

namespace {

// Calls fn(mask) for every k-bit mask with exactly p bits set, in increasing
// numeric order.
template <typename Fn>
void for_each_subset(std::size_t k, std::size_t p, Fn&& fn) {
  if (p == 0) {
    fn(std::uint64_t{0});
    return;
  }
  std::uint64_t mask = (std::uint64_t{1} << p) - 1;
  const std::uint64_t limit = std::uint64_t{1} << k;
  while (mask < limit) {
    fn(mask);
    // Gosper's hack: next integer with the same popcount.
    const std::uint64_t c = mask & -mask;
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
}

}  // namespace

std::vector<double> leave_p_out_weights(std::span<const double> rewards, std::size_t p) {
  const std::size_t k = rewards.size();
  if (k < 2) throw ArgumentError("leave_p_out: needs k >= 2");
  if (p < 1 || p > k - 1) throw ArgumentError("leave_p_out: p must be in [1, k-1]");
  if (k > 30) throw ArgumentError("leave_p_out: k too large for subset enumeration");

  const double best = *std::max_element(rewards.begin(), rewards.end());
  std::vector<std::uint64_t> subsets;
  std::vector<double> adv;
  for_each_subset(k, p, [&](std::uint64_t s) {
    double rest = -INFINITY;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(s >> i & 1U)) rest = std::max(rest, rewards[i]);
    }
    subsets.push_back(s);
    adv.push_back(best - rest);
  });
  const double mean_adv = mean_of(adv);
  const double scale = 1.0 / binomial(static_cast<std::int64_t>(k) - 1,
                                      static_cast<std::int64_t>(p) - 1);
  std::vector<CompensatedSum> acc(k);
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    const double centered = adv[j] - mean_adv;
    for (std::size_t i = 0; i < k; ++i) {
      if (subsets[j] >> i & 1U) acc[i].add(centered);
    }
  }
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = scale * acc[i].value();
  return w;
}

GradientTensor estimate_leave_p_out(const AggregatorKind& kind, const SampleBatch& batch,
                                    const PolicyParams& params, std::size_t p) {
  if (kind.tag != AggregatorTag::kMax) {
    throw ArgumentError("leave_p_out is only defined for the max aggregator");
  }
  batch.validate();
  const auto w = leave_p_out_weights(batch.rewards, p);
  return weighted_score(params, batch.prompt, batch.actions, w);
}

std::vector<double> effective_reward(EffectiveReward variant,
                                     std::span<const double> rewards) {
  const std::size_t k = rewards.size();
  if (variant == EffectiveReward::kMean) return {rewards.begin(), rewards.end()};
  if (k < 2) throw ArgumentError("effective_reward: pass_k forms need k >= 2");
  SampleBatch b;
  b.rewards.assign(rewards.begin(), rewards.end());
  b.actions.assign(k, 0);
  auto out = advantages(AggregatorKind::max(), b).values;
  if (variant == EffectiveReward::kBiasedPassK) {
    const double m = mean_of(out);
    for (double& x : out) x -= m;
  }
  return out;
}

namespace {

GradientTensor clipped_surrogate_grad(const SampleBatch& batch,
                                      const PolicyParams& params_old,
                                      const PolicyParams& params,
                                      std::span<const double> adv, double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("clipped surrogate: epsilon must be positive");
  if (!params.logits().same_shape(params_old.logits())) {
    throw ArgumentError("clipped surrogate: old and new policies differ in shape");
  }
  const std::size_t k = batch.k();
  const auto p_new = probs(params, batch.prompt);
  const auto p_old = probs(params_old, batch.prompt);
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const ActionId y = batch.actions.at(i);
    if (y >= p_new.size()) throw IndexError("clipped surrogate: action out of range");
    if (!(p_old[y] > 0.0)) {
      throw NumericalError("clipped surrogate: zero probability under the old policy");
    }
    const double ratio = p_new[y] / p_old[y];
    const bool flat = (adv[i] > 0.0 && ratio > 1.0 + epsilon) ||
                      (adv[i] < 0.0 && ratio < 1.0 - epsilon);
    // d rho / d theta = rho * grad log pi.
    if (!flat) w[i] = adv[i] * ratio / static_cast<double>(k);
  }
  return weighted_score(params, batch.prompt, batch.actions, w);
}

}  // namespace

GradientTensor ppo_step_grad(const SampleBatch& batch, const PolicyParams& params_old,
                             const PolicyParams& params, const ValueBaseline& value,
                             EffectiveReward variant, double epsilon) {
  batch.validate();
  if (batch.k() == 0) throw ArgumentError("ppo_step_grad: empty batch");
  auto adv = effective_reward(variant, batch.rewards);
  const double v = value.at(batch.prompt);
  for (double& a : adv) a -= v;
  return clipped_surrogate_grad(batch, params_old, params, adv, epsilon);
}

double value_loss(double v, std::span<const double> returns, double v_old, double alpha) {
  const double clipped = std::clamp(v, v_old - alpha, v_old + alpha);
  CompensatedSum s;
  for (double r : returns) {
    s.add(0.5 * std::max((v - r) * (v - r), (clipped - r) * (clipped - r)));
  }
  return s.value() / static_cast<double>(returns.size());
}

double value_loss_grad(const ValueBaseline& value, PromptId prompt,
                       std::span<const double> returns, const ValueBaseline& value_old,
                       double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("value_loss_grad: alpha must be positive");
  if (returns.empty()) throw ArgumentError("value_loss_grad: no returns");
  const double v = value.at(prompt);
  const double v_old = value_old.at(prompt);
  const double lo = v_old - alpha;
  const double hi = v_old + alpha;
  const double clipped = std::clamp(v, lo, hi);
  const bool inside = v >= lo && v <= hi;
  CompensatedSum g;
  for (double r : returns) {
    const double plain = (v - r) * (v - r);
    const double clip = (clipped - r) * (clipped - r);
    if (plain >= clip) {
      g.add(v - r);
    } else if (inside) {
      g.add(clipped - r);
    }
    // Clipped branch outside the band is flat in V.
  }
  const double out = g.value() / static_cast<double>(returns.size());
  if (!std::isfinite(out)) throw NumericalError("value_loss_grad: non-finite gradient");
  return out;
}

GradientTensor grpo_step_grad(const SampleBatch& batch, const PolicyParams& params_old,
                              const PolicyParams& params, EffectiveReward variant,
                              bool normalize_std, double epsilon) {
  batch.validate();
  if (batch.k() == 0) throw ArgumentError("grpo_step_grad: empty batch");
  auto adv = effective_reward(variant, batch.rewards);
  if (normalize_std) {
    const double m = mean_of(adv);
    CompensatedSum ss;
    for (double a : adv) ss.add((a - m) * (a - m));
    const double sd = std::sqrt(ss.value() / static_cast<double>(adv.size()));
    if (sd < kStdGuard) {
      std::fill(adv.begin(), adv.end(), 0.0);
    } else {
      for (double& a : adv) a /= sd;
    }
  }
  return clipped_surrogate_grad(batch, params_old, params, adv, epsilon);
}

GradientTensor estimate(const EstimatorKind& estimator, const AggregatorKind& kind,
                        const SampleBatch& batch, const PolicyParams& params) {
  estimator.validate(batch.k());
  switch (estimator.tag) {
    case EstimatorTag::kNaive:
      return estimate_naive(kind, batch, params);
    case EstimatorTag::kLoo:
      return estimate_loo(kind, batch, params);
    case EstimatorTag::kDemeaned:
      return estimate_demeaned(kind, batch, params);
    case EstimatorTag::kLeavePOut:
      return estimate_leave_p_out(kind, batch, params, estimator.p);
    case EstimatorTag::kPpo:
      return ppo_step_grad(batch, params, params, ValueBaseline::zeros(params.n_prompts()),
                           estimator.variant, estimator.epsilon);
    case EstimatorTag::kGrpo:
      return grpo_step_grad(batch, params, params, estimator.variant,
                            estimator.normalize_std, estimator.epsilon);
  }
  throw ArgumentError("unknown estimator");
}

}  // namespace ksample
