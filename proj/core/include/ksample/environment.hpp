#ifndef KSAMPLE_ENVIRONMENT_HPP_
#define KSAMPLE_ENVIRONMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ksample/matrix.hpp"
#include "ksample/policy.hpp"

namespace ksample {

using LabelId = std::size_t;

// Deterministic reward table r(x, y) over a uniform prompt distribution, with
// an optional answer label per (prompt, action) and a target label a* per
// prompt. Immutable once built.
class Environment {
 public:
  struct Labels {
    std::vector<std::vector<LabelId>> label;  // [prompt][action]
    std::vector<LabelId> target;              // [prompt]
    std::size_t n_labels = 0;
    bool operator==(const Labels&) const = default;
  };

  // Validates shapes, finiteness and label ranges.
  Environment(DenseMatrix rewards, std::optional<Labels> labels = std::nullopt);

  std::size_t n_prompts() const { return rewards_.rows(); }
  std::size_t n_actions() const { return rewards_.cols(); }
  bool has_labels() const { return labels_.has_value(); }
  std::size_t n_labels() const;

  double reward(PromptId prompt, ActionId action) const;
  LabelId label(PromptId prompt, ActionId action) const;
  LabelId target_label(PromptId prompt) const;
  // Reward of answering `label` on `prompt`; requires every action carrying
  // that label to have the same reward (true for the labeled builders).
  double label_reward(PromptId prompt, LabelId label) const;

  const DenseMatrix& rewards() const { return rewards_; }
  const std::optional<Labels>& labels() const { return labels_; }
  std::span<const double> reward_row(PromptId prompt) const;

  bool operator==(const Environment&) const = default;

 private:
  void check_ids(PromptId prompt, ActionId action) const;

  DenseMatrix rewards_;
  std::optional<Labels> labels_;
};

// Single prompt, rewards drawn once from N(0, 1).
Environment build_gaussian_bandit(std::size_t n_actions, std::uint64_t seed);

// Single prompt; actions get labels so that every label is used at least
// once, one label is the target, reward is +1 on a match and -1 otherwise.
Environment build_labeled_bandit(std::size_t n_actions, std::size_t n_labels,
                                 std::uint64_t seed);

// Multi-prompt labeled environment. Prompt x gets round(success_fraction[x] *
// n_actions) actions (at least one) labeled with the target; the remaining
// actions are spread over the other labels. Rewards are +1 / -1 by match.
Environment build_difficulty_env(std::span<const double> success_fraction,
                                 std::size_t n_actions, std::size_t n_labels,
                                 std::uint64_t seed);

}  // namespace ksample

#endif  // KSAMPLE_ENVIRONMENT_HPP_
