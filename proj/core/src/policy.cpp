#include "ksample/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample {

namespace {

void check_prompt(const PolicyParams& params, PromptId prompt) {
  if (prompt >= params.n_prompts()) {
    throw IndexError("prompt id " + std::to_string(prompt) + " out of range [0, " +
                     std::to_string(params.n_prompts()) + ")");
  }
}

void check_action(const PolicyParams& params, ActionId action) {
  if (action >= params.n_actions()) {
    throw IndexError("action id " + std::to_string(action) + " out of range [0, " +
                     std::to_string(params.n_actions()) + ")");
  }
}

}  // namespace

PolicyParams PolicyParams::uniform(std::size_t n_prompts, std::size_t n_actions) {
  if (n_prompts == 0 || n_actions == 0) {
    throw ArgumentError("PolicyParams: n_prompts and n_actions must be positive");
  }
  return PolicyParams(DenseMatrix(n_prompts, n_actions, 0.0));
}

PolicyParams PolicyParams::from_logits(DenseMatrix logits) {
  if (logits.rows() == 0 || logits.cols() == 0) {
    throw ArgumentError("PolicyParams: n_prompts and n_actions must be positive");
  }
  for (double x : logits.values()) {
    if (!std::isfinite(x)) throw ArgumentError("PolicyParams: non-finite logit");
  }
  return PolicyParams(std::move(logits));
}

std::span<const double> PolicyParams::logits_row(PromptId prompt) const {
  check_prompt(*this, prompt);
  return logits_.row(prompt);
}

double PolicyParams::logit(PromptId prompt, ActionId action) const {
  check_prompt(*this, prompt);
  check_action(*this, action);
  return logits_(prompt, action);
}

void PolicyParams::set_logit(PromptId prompt, ActionId action, double value) {
  check_prompt(*this, prompt);
  check_action(*this, action);
  if (!std::isfinite(value)) throw ArgumentError("PolicyParams: non-finite logit");
  logits_(prompt, action) = value;
}

void PolicyParams::ascend(const GradientTensor& g, double step) {
  if (!logits_.same_shape(g)) throw ArgumentError("ascend: gradient shape mismatch");
  DenseMatrix next = logits_;
  auto dst = next.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += step * src[i];
    if (!std::isfinite(dst[i])) throw NumericalError("ascend: logit overflow");
  }
  logits_ = std::move(next);
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - m);
    z += out[a];
  }
  for (double& p : out) p /= z;
}

std::vector<double> probs(const PolicyParams& params, PromptId prompt) {
  auto row = params.logits_row(prompt);
  std::vector<double> out(row.size());
  softmax_into(row, out);
  return out;
}

std::vector<ActionId> sample_actions(const PolicyParams& params, PromptId prompt,
                                     std::size_t k, Rng& rng) {
  if (k == 0) throw ArgumentError("sample_actions: k must be at least 1");
  const auto p = probs(params, prompt);
  std::vector<ActionId> out(k);
  for (auto& a : out) a = rng.categorical(p);
  return out;
}

GradientTensor logprob_grad(const PolicyParams& params, PromptId prompt,
                            ActionId action) {
  const ActionId actions[] = {action};
  const double weights[] = {1.0};
  return weighted_score(params, prompt, actions, weights);
}

GradientTensor weighted_score(const PolicyParams& params, PromptId prompt,
                              std::span<const ActionId> actions,
                              std::span<const double> weights) {
  if (actions.size() != weights.size()) {
    throw ArgumentError("weighted_score: actions and weights differ in length");
  }
  const auto p = probs(params, prompt);
  GradientTensor g(params.n_prompts(), params.n_actions());
  auto row = g.row(prompt);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    check_action(params, actions[i]);
    const double w = weights[i];
    for (std::size_t a = 0; a < row.size(); ++a) {
      row[a] += w * ((a == actions[i] ? 1.0 : 0.0) - p[a]);
    }
  }
  return g;
}

double kl_to_reference(const PolicyParams& params, const PolicyParams& ref) {
  if (!params.logits().same_shape(ref.logits())) {
    throw ArgumentError("kl_to_reference: shape mismatch");
  }
  CompensatedSum total;
  for (PromptId x = 0; x < params.n_prompts(); ++x) {
    const auto p = probs(params, x);
    const auto q = probs(ref, x);
    CompensatedSum kl;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p[a] > 0.0) kl.add(p[a] * (std::log(p[a]) - std::log(q[a])));
    }
    total.add(std::max(0.0, kl.value()));
  }
  return total.value() / static_cast<double>(params.n_prompts());
}

}  // namespace ksample
