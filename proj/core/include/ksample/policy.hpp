#ifndef KSAMPLE_POLICY_HPP_
#define KSAMPLE_POLICY_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ksample/matrix.hpp"
#include "ksample/rng.hpp"

namespace ksample {

using PromptId = std::size_t;
using ActionId = std::size_t;

// Tabular softmax policy: one row of logits per prompt. Probabilities are
// computed with the row maximum subtracted, so adding a constant to a row
// changes nothing.
class PolicyParams {
 public:
  // All-zero logits, i.e. the uniform policy.
  static PolicyParams uniform(std::size_t n_prompts, std::size_t n_actions);
  static PolicyParams from_logits(DenseMatrix logits);

  std::size_t n_prompts() const { return logits_.rows(); }
  std::size_t n_actions() const { return logits_.cols(); }

  const DenseMatrix& logits() const { return logits_; }
  std::span<const double> logits_row(PromptId prompt) const;
  double logit(PromptId prompt, ActionId action) const;
  void set_logit(PromptId prompt, ActionId action, double value);

  // theta <- theta + step * g. Throws NumericalError if any logit becomes
  // non-finite (the parameters are left untouched in that case).
  void ascend(const GradientTensor& g, double step);

  bool operator==(const PolicyParams&) const = default;

 private:
  explicit PolicyParams(DenseMatrix logits) : logits_(std::move(logits)) {}

  DenseMatrix logits_;
};

std::vector<double> probs(const PolicyParams& params, PromptId prompt);
// Writes the softmax of `logits` into `out` (same length).
void softmax_into(std::span<const double> logits, std::span<double> out);

std::vector<ActionId> sample_actions(const PolicyParams& params, PromptId prompt,
                                     std::size_t k, Rng& rng);

// grad log pi(action | prompt): one_hot(action) - probs in row `prompt`,
// zeros elsewhere.
GradientTensor logprob_grad(const PolicyParams& params, PromptId prompt,
                            ActionId action);

// Sum_i weights[i] * grad log pi(actions[i] | prompt), sharing one softmax
// evaluation across the batch.
GradientTensor weighted_score(const PolicyParams& params, PromptId prompt,
                              std::span<const ActionId> actions,
                              std::span<const double> weights);

// Mean over prompts of KL(pi_params(.|x) || pi_ref(.|x)).
double kl_to_reference(const PolicyParams& params, const PolicyParams& ref);

}  // namespace ksample

#endif  // KSAMPLE_POLICY_HPP_
