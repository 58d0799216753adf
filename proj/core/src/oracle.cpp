#include "ksample/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample {

namespace {

constexpr double kLogSpaceThreshold = 1e-12;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

void check_compatible(const PolicyParams& params, const Environment& env) {
  if (params.n_prompts() != env.n_prompts() || params.n_actions() != env.n_actions()) {
    throw ArgumentError("policy and environment shapes differ");
  }
}

void check_budget(std::uint64_t needed, EnumerationBudget budget, const char* what) {
  if (needed > budget.max_tuples) {
    throw ResourceError(std::string(what) + ": enumeration needs " +
                        std::to_string(needed) + " terms, budget is " +
                        std::to_string(budget.max_tuples));
  }
}

// Visits every k-tuple of actions for every prompt in lexicographic order,
// passing the batch and its probability under the policy.
template <typename Visitor>
void enumerate_tuples(const PolicyParams& params, const Environment& env,
                      std::size_t k, EnumerationBudget budget, Visitor&& visit) {
  check_compatible(params, env);
  if (k == 0) throw ArgumentError("enumeration needs k >= 1");
  check_budget(tuple_count(env.n_actions(), k, env.n_prompts()), budget,
               "tuple enumeration");
  const std::size_t n = env.n_actions();
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const auto p = probs(params, x);
    const bool log_space =
        *std::min_element(p.begin(), p.end()) < kLogSpaceThreshold;
    std::vector<double> logp(n);
    if (log_space) {
      for (std::size_t a = 0; a < n; ++a) logp[a] = std::log(p[a]);
    }
    SampleBatch batch = make_batch(env, x, std::vector<ActionId>(k, 0));
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      double prob = 1.0;
      if (log_space) {
        double lp = 0.0;
        for (std::size_t i = 0; i < k; ++i) lp += logp[idx[i]];
        prob = std::exp(lp);
      } else {
        for (std::size_t i = 0; i < k; ++i) prob *= p[idx[i]];
      }
      visit(batch, prob, p);
      // Odometer increment, last position fastest.
      std::size_t pos = k;
      while (pos > 0) {
        --pos;
        if (++idx[pos] < n) break;
        idx[pos] = 0;
      }
      const bool wrapped = pos == 0 && idx[0] == 0;
      if (wrapped) break;
      for (std::size_t i = pos; i < k; ++i) {
        const ActionId y = idx[i];
        batch.actions[i] = y;
        batch.rewards[i] = env.reward(x, y);
        if (batch.labels) (*batch.labels)[i] = env.label(x, y);
      }
    }
  }
}

}  // namespace

std::uint64_t tuple_count(std::size_t n_actions, std::size_t k, std::size_t n_prompts) {
  std::uint64_t c = n_prompts;
  for (std::size_t i = 0; i < k; ++i) c = saturating_mul(c, n_actions);
  return c;
}

double exact_expectation(const BatchFunctional& g, const PolicyParams& params,
                         const Environment& env, std::size_t k,
                         EnumerationBudget budget) {
  CompensatedSum total;
  enumerate_tuples(params, env, k, budget,
                   [&](const SampleBatch& b, double prob, const std::vector<double>&) {
                     total.add(prob * g(b));
                   });
  return total.value() / static_cast<double>(env.n_prompts());
}

GradientTensor exact_functional_gradient(const BatchFunctional& g,
                                         const PolicyParams& params,
                                         const Environment& env, std::size_t k,
                                         EnumerationBudget budget) {
  const std::size_t n = env.n_actions();
  // Row x of the gradient is (1/n_prompts) * sum_tuples P g sum_i (e_{y_i} - p),
  // i.e. (counts_a - k p_a total) / n_prompts.
  std::vector<CompensatedSum> counts(n * env.n_prompts());
  std::vector<CompensatedSum> totals(env.n_prompts());
  enumerate_tuples(params, env, k, budget,
                   [&](const SampleBatch& b, double prob, const std::vector<double>&) {
                     const double w = prob * g(b);
                     if (w == 0.0) return;
                     totals[b.prompt].add(w);
                     for (ActionId y : b.actions) counts[b.prompt * n + y].add(w);
                   });
  GradientTensor out(env.n_prompts(), n);
  const double inv_prompts = 1.0 / static_cast<double>(env.n_prompts());
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const auto p = probs(params, x);
    const double t = totals[x].value();
    for (std::size_t a = 0; a < n; ++a) {
      CompensatedSum entry;
      entry.add(counts[x * n + a].value());
      entry.add(-static_cast<double>(k) * p[a] * t);
      out(x, a) = entry.value() * inv_prompts;
    }
  }
  return out;
}

GradientTensor exact_expectation_of(const BatchEstimator& estimator,
                                    const PolicyParams& params, const Environment& env,
                                    std::size_t k, EnumerationBudget budget) {
  GradientAccumulator acc(env.n_prompts(), env.n_actions());
  const double inv_prompts = 1.0 / static_cast<double>(env.n_prompts());
  enumerate_tuples(params, env, k, budget,
                   [&](const SampleBatch& b, double prob, const std::vector<double>&) {
                     acc.add(estimator(b), prob * inv_prompts);
                   });
  return acc.result();
}

double exact_objective(const AggregatorKind& kind, const PolicyParams& params,
                       const Environment& env, std::size_t k, EnumerationBudget budget) {
  return exact_expectation([&](const SampleBatch& b) { return aggregate(kind, b); },
                           params, env, k, budget);
}

GradientTensor exact_gradient(const AggregatorKind& kind, const PolicyParams& params,
                              const Environment& env, std::size_t k,
                              EnumerationBudget budget) {
  return exact_functional_gradient(
      [&](const SampleBatch& b) { return aggregate(kind, b); }, params, env, k, budget);
}

GradientTensor exact_estimator_expectation(const EstimatorKind& estimator,
                                           const AggregatorKind& kind,
                                           const PolicyParams& params,
                                           const Environment& env, std::size_t k,
                                           EnumerationBudget budget) {
  estimator.validate(k);
  return exact_expectation_of(
      [&](const SampleBatch& b) { return estimate(estimator, kind, b, params); }, params,
      env, k, budget);
}

namespace {

double loo_average(const AggregatorKind& kind, const SampleBatch& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < b.k(); ++i) s.add(leave_one_out(kind, b, i));
  return s.value() / static_cast<double>(b.k());
}

}  // namespace

double biased_objective(const AggregatorKind& kind, const PolicyParams& params,
                        const Environment& env, std::size_t k, EnumerationBudget budget) {
  if (k < 2) throw ArgumentError("biased_objective: needs k >= 2");
  return exact_expectation([&](const SampleBatch& b) { return loo_average(kind, b); },
                           params, env, k, budget);
}

GradientTensor biased_gradient(const AggregatorKind& kind, const PolicyParams& params,
                               const Environment& env, std::size_t k,
                               EnumerationBudget budget) {
  if (k < 2) throw ArgumentError("biased_gradient: needs k >= 2");
  return exact_functional_gradient(
      [&](const SampleBatch& b) { return loo_average(kind, b); }, params, env, k, budget);
}

double expected_order_statistic(const PolicyParams& params, const Environment& env,
                                std::size_t k, std::size_t j, EnumerationBudget budget) {
  if (j < 1 || j > k) throw ArgumentError("order statistic index must be in [1, k]");
  return exact_expectation(
      [j](const SampleBatch& b) {
        std::vector<double> r = b.rewards;
        std::sort(r.begin(), r.end());
        return r[j - 1];
      },
      params, env, k, budget);
}

double expected_top_gap(const PolicyParams& params, const Environment& env,
                        std::size_t k, EnumerationBudget budget) {
  if (k < 2) throw ArgumentError("expected_top_gap: needs k >= 2");
  return exact_expectation(
      [](const SampleBatch& b) {
        std::vector<double> r = b.rewards;
        std::sort(r.begin(), r.end());
        return r[r.size() - 1] - r[r.size() - 2];
      },
      params, env, k, budget);
}

namespace {

double leave_p_out_value(const SampleBatch& b, std::size_t p) {
  const std::size_t k = b.k();
  std::vector<bool> drop(k, false);
  std::fill(drop.begin(), drop.begin() + static_cast<std::ptrdiff_t>(p), true);
  CompensatedSum s;
  double count = 0.0;
  // prev_permutation walks every p-subset exactly once.
  do {
    double m = -INFINITY;
    for (std::size_t i = 0; i < k; ++i) {
      if (!drop[i]) m = std::max(m, b.rewards[i]);
    }
    s.add(m);
    count += 1.0;
  } while (std::prev_permutation(drop.begin(), drop.end()));
  return s.value() / count;
}

void check_p(std::size_t k, std::size_t p) {
  if (p >= k) throw ArgumentError("leave-p-out objective needs p < k");
}

}  // namespace

double leave_p_out_objective(const PolicyParams& params, const Environment& env,
                             std::size_t k, std::size_t p, EnumerationBudget budget) {
  check_p(k, p);
  return exact_expectation([p](const SampleBatch& b) { return leave_p_out_value(b, p); },
                           params, env, k, budget);
}

GradientTensor leave_p_out_gradient(const PolicyParams& params, const Environment& env,
                                    std::size_t k, std::size_t p,
                                    EnumerationBudget budget) {
  check_p(k, p);
  return exact_functional_gradient(
      [p](const SampleBatch& b) { return leave_p_out_value(b, p); }, params, env, k,
      budget);
}

double exact_mean_reward(const PolicyParams& params, const Environment& env) {
  check_compatible(params, env);
  CompensatedSum total;
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const auto p = probs(params, x);
    CompensatedSum s;
    for (ActionId y = 0; y < env.n_actions(); ++y) s.add(p[y] * env.reward(x, y));
    total.add(s.value());
  }
  return total.value() / static_cast<double>(env.n_prompts());
}

double exact_pass_at_k(const PolicyParams& params, const Environment& env,
                       std::size_t k) {
  check_compatible(params, env);
  if (k == 0) throw ArgumentError("exact_pass_at_k: needs k >= 1");
  const double kd = static_cast<double>(k);
  CompensatedSum total;
  std::vector<ActionId> order(env.n_actions());
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const auto p = probs(params, x);
    const auto r = env.reward_row(x);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](ActionId a, ActionId b) { return r[a] < r[b]; });
    CompensatedSum e;
    CompensatedSum cdf;
    double prev_pow = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
      const double v = r[order[i]];
      while (i < order.size() && r[order[i]] == v) cdf.add(p[order[i++]]);
      const double f = std::min(1.0, cdf.value());
      const double cur_pow = std::pow(f, kd);
      e.add(v * (cur_pow - prev_pow));
      prev_pow = cur_pow;
    }
    total.add(e.value());
  }
  return total.value() / static_cast<double>(env.n_prompts());
}

namespace {

// Expected-tie majority reward of a label count vector.
double majority_reward(const std::vector<std::size_t>& counts,
                       const std::vector<double>& label_rewards) {
  const std::size_t best = *std::max_element(counts.begin(), counts.end());
  double s = 0.0;
  double n = 0.0;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == best) {
      s += label_rewards[l];
      n += 1.0;
    }
  }
  return s / n;
}

}  // namespace

double exact_majority_accuracy(const PolicyParams& params, const Environment& env,
                               std::size_t k, EnumerationBudget budget) {
  check_compatible(params, env);
  if (!env.has_labels()) throw StateError("exact_majority_accuracy: environment has no labels");
  if (k == 0) throw ArgumentError("exact_majority_accuracy: needs k >= 1");

  // Labels actually used on each prompt, with their mass and reward.
  std::vector<std::vector<double>> mass(env.n_prompts());
  std::vector<std::vector<double>> rew(env.n_prompts());
  std::uint64_t needed = 0;
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const auto p = probs(params, x);
    std::map<LabelId, double> m;
    for (ActionId y = 0; y < env.n_actions(); ++y) m[env.label(x, y)] += p[y];
    for (const auto& [l, q] : m) {
      mass[x].push_back(q);
      rew[x].push_back(env.label_reward(x, l));
    }
    const double c = binomial(static_cast<std::int64_t>(k + m.size()) - 1,
                              static_cast<std::int64_t>(m.size()) - 1);
    const double sat = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
    needed = c >= sat || static_cast<double>(needed) + c >= sat
                 ? std::numeric_limits<std::uint64_t>::max()
                 : needed + static_cast<std::uint64_t>(c);
  }
  check_budget(needed, budget, "majority count-vector enumeration");

  const double log_k_fact = std::lgamma(static_cast<double>(k) + 1.0);
  CompensatedSum total;
  for (PromptId x = 0; x < env.n_prompts(); ++x) {
    const std::size_t n_labels = mass[x].size();
    std::vector<double> logq(n_labels);
    for (std::size_t l = 0; l < n_labels; ++l) logq[l] = std::log(mass[x][l]);
    std::vector<std::size_t> counts(n_labels, 0);
    CompensatedSum e;
    // Recursive composition of k into n_labels parts.
    auto rec = [&](auto&& self, std::size_t l, std::size_t left, double logp) -> void {
      if (l + 1 == n_labels) {
        counts[l] = left;
        const double lp = logp + static_cast<double>(left) * logq[l] -
                          std::lgamma(static_cast<double>(left) + 1.0);
        e.add(std::exp(log_k_fact + lp) * majority_reward(counts, rew[x]));
        return;
      }
      for (std::size_t c = 0; c <= left; ++c) {
        counts[l] = c;
        self(self, l + 1, left - c,
             logp + static_cast<double>(c) * logq[l] -
                 std::lgamma(static_cast<double>(c) + 1.0));
      }
    };
    rec(rec, 0, k, 0.0);
    total.add(e.value());
  }
  return total.value() / static_cast<double>(env.n_prompts());
}

MonteCarloEstimate monte_carlo_majority_accuracy(const PolicyParams& params,
                                                 const Environment& env, std::size_t k,
                                                 std::size_t samples, Rng& rng) {
  check_compatible(params, env);
  if (!env.has_labels()) throw StateError("monte_carlo_majority_accuracy: no labels");
  if (samples < 2) throw ArgumentError("monte_carlo_majority_accuracy: need >= 2 samples");
  const auto kind = AggregatorKind::majority();
  CompensatedSum s;
  CompensatedSum ss;
  for (std::size_t t = 0; t < samples; ++t) {
    const PromptId x = env.n_prompts() == 1 ? 0 : rng.uniform_index(env.n_prompts());
    const double v = aggregate(kind, make_batch(env, x, sample_actions(params, x, k, rng)));
    s.add(v);
    ss.add(v * v);
  }
  const double n = static_cast<double>(samples);
  const double mean = s.value() / n;
  const double var = std::max(0.0, (ss.value() - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

GradientTensor finite_diff_gradient(const AggregatorKind& kind,
                                    const PolicyParams& params, const Environment& env,
                                    std::size_t k, double eps, EnumerationBudget budget) {
  check_compatible(params, env);
  if (!(eps > 0.0)) throw ArgumentError("finite_diff_gradient: eps must be positive");
  GradientTensor out(params.n_prompts(), params.n_actions());
  for (PromptId x = 0; x < params.n_prompts(); ++x) {
    for (ActionId a = 0; a < params.n_actions(); ++a) {
      PolicyParams plus = params;
      PolicyParams minus = params;
      plus.set_logit(x, a, params.logit(x, a) + eps);
      minus.set_logit(x, a, params.logit(x, a) - eps);
      const double fp = exact_objective(kind, plus, env, k, budget);
      const double fm = exact_objective(kind, minus, env, k, budget);
      out(x, a) = (fp - fm) / (2.0 * eps);
    }
  }
  return out;
}

}  // namespace ksample
