#ifndef KSAMPLE_ORACLE_HPP_
#define KSAMPLE_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>

#include "ksample/aggregators.hpp"
#include "ksample/environment.hpp"
#include "ksample/estimators.hpp"
#include "ksample/matrix.hpp"
#include "ksample/policy.hpp"
#include "ksample/rng.hpp"

namespace ksample {

// Refuses exact computations over more than max_tuples terms.
struct EnumerationBudget {
  std::uint64_t max_tuples = 10'000'000;
};

// A scalar function of one k-sample batch.
using BatchFunctional = std::function<double(const SampleBatch&)>;
// A per-batch gradient estimator.
using BatchEstimator = std::function<GradientTensor(const SampleBatch&)>;

// Number of (prompt, k-tuple) terms in a full enumeration; saturates at
// UINT64_MAX.
std::uint64_t tuple_count(std::size_t n_actions, std::size_t k, std::size_t n_prompts);

// E_x E_{y_1..y_k ~ pi(.|x)} [g(batch)], x uniform over prompts.
double exact_expectation(const BatchFunctional& g, const PolicyParams& params,
                         const Environment& env, std::size_t k,
                         EnumerationBudget budget = {});

// Gradient of exact_expectation(g) with respect to the logits, by the score
// function identity applied to every tuple.
GradientTensor exact_functional_gradient(const BatchFunctional& g,
                                         const PolicyParams& params,
                                         const Environment& env, std::size_t k,
                                         EnumerationBudget budget = {});

// E_x E_y [estimator(batch)].
GradientTensor exact_expectation_of(const BatchEstimator& estimator,
                                    const PolicyParams& params, const Environment& env,
                                    std::size_t k, EnumerationBudget budget = {});

// k-sample objective E[f(y)].
double exact_objective(const AggregatorKind& kind, const PolicyParams& params,
                       const Environment& env, std::size_t k,
                       EnumerationBudget budget = {});
GradientTensor exact_gradient(const AggregatorKind& kind, const PolicyParams& params,
                              const Environment& env, std::size_t k,
                              EnumerationBudget budget = {});

// Exact expectation of an estimator (on-policy; PPO/GRPO with params as the
// old policy and a zero value baseline).
GradientTensor exact_estimator_expectation(const EstimatorKind& estimator,
                                           const AggregatorKind& kind,
                                           const PolicyParams& params,
                                           const Environment& env, std::size_t k,
                                           EnumerationBudget budget = {});

// Averaged leave-one-out objective E[(1/k) sum_i f(y_{-i})], optimised by the
// demeaned estimator.
double biased_objective(const AggregatorKind& kind, const PolicyParams& params,
                        const Environment& env, std::size_t k,
                        EnumerationBudget budget = {});
GradientTensor biased_gradient(const AggregatorKind& kind, const PolicyParams& params,
                               const Environment& env, std::size_t k,
                               EnumerationBudget budget = {});

// E[r_(k) - r_(k-1)], the expected gap between the best and second-best
// reward of k samples, from sorted tuples.
double expected_top_gap(const PolicyParams& params, const Environment& env,
                        std::size_t k, EnumerationBudget budget = {});
// E[r_(j)] for the j-th order statistic (1-based, ascending) of k samples.
double expected_order_statistic(const PolicyParams& params, const Environment& env,
                                std::size_t k, std::size_t j,
                                EnumerationBudget budget = {});

// Leave-p-out objective for max: E[(1/C(k,p)) sum_{|s|=p} max_{i not in s} r_i].
double leave_p_out_objective(const PolicyParams& params, const Environment& env,
                             std::size_t k, std::size_t p,
                             EnumerationBudget budget = {});
GradientTensor leave_p_out_gradient(const PolicyParams& params, const Environment& env,
                                    std::size_t k, std::size_t p,
                                    EnumerationBudget budget = {});

// Expected single-sample reward averaged over prompts.
double exact_mean_reward(const PolicyParams& params, const Environment& env);

// Closed-form E[max of k] from the per-prompt reward CDF; O(|Y| log |Y|).
double exact_pass_at_k(const PolicyParams& params, const Environment& env,
                       std::size_t k);

// Majority-vote reward with expected tie-breaking, by enumerating label count
// vectors. Throws ResourceError if C(k+L-1, L-1) * n_prompts exceeds budget.
double exact_majority_accuracy(const PolicyParams& params, const Environment& env,
                               std::size_t k, EnumerationBudget budget = {});

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

MonteCarloEstimate monte_carlo_majority_accuracy(const PolicyParams& params,
                                                 const Environment& env, std::size_t k,
                                                 std::size_t samples, Rng& rng);

// Central differences of exact_objective with respect to every logit.
GradientTensor finite_diff_gradient(const AggregatorKind& kind,
                                    const PolicyParams& params, const Environment& env,
                                    std::size_t k, double eps = 1e-5,
                                    EnumerationBudget budget = {});

}  // namespace ksample

#endif  // KSAMPLE_ORACLE_HPP_
