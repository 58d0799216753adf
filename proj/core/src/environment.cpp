#include "ksample/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ksample/errors.hpp"
#include "ksample/rng.hpp"

namespace ksample {

Environment::Environment(DenseMatrix rewards, std::optional<Labels> labels)
    : rewards_(std::move(rewards)), labels_(std::move(labels)) {
  if (rewards_.rows() == 0 || rewards_.cols() == 0) {
    throw ArgumentError("Environment: n_prompts and n_actions must be positive");
  }
  for (double r : rewards_.values()) {
    if (!std::isfinite(r)) throw ArgumentError("Environment: non-finite reward");
  }
  if (!labels_) return;
  const Labels& l = *labels_;
  if (l.n_labels == 0) throw ArgumentError("Environment: n_labels must be positive");
  if (l.label.size() != n_prompts() || l.target.size() != n_prompts()) {
    throw ArgumentError("Environment: label rows do not match n_prompts");
  }
  for (PromptId x = 0; x < n_prompts(); ++x) {
    if (l.label[x].size() != n_actions()) {
      throw ArgumentError("Environment: label row " + std::to_string(x) +
                          " does not match n_actions");
    }
    for (LabelId a : l.label[x]) {
      if (a >= l.n_labels) throw ArgumentError("Environment: label id out of range");
    }
    if (l.target[x] >= l.n_labels) {
      throw ArgumentError("Environment: target label out of range");
    }
    // Rewards must be a function of the label so majority voting is defined.
    for (ActionId y = 0; y < n_actions(); ++y) {
      for (ActionId z = y + 1; z < n_actions(); ++z) {
        if (l.label[x][y] == l.label[x][z] && rewards_(x, y) != rewards_(x, z)) {
          throw ArgumentError("Environment: actions sharing a label must share a reward");
        }
      }
    }
  }
}

std::size_t Environment::n_labels() const {
  if (!labels_) throw StateError("environment has no labels");
  return labels_->n_labels;
}

void Environment::check_ids(PromptId prompt, ActionId action) const {
  if (prompt >= n_prompts()) {
    throw IndexError("prompt id " + std::to_string(prompt) + " out of range");
  }
  if (action >= n_actions()) {
    throw IndexError("action id " + std::to_string(action) + " out of range");
  }
}

double Environment::reward(PromptId prompt, ActionId action) const {
  check_ids(prompt, action);
  return rewards_(prompt, action);
}

LabelId Environment::label(PromptId prompt, ActionId action) const {
  if (!labels_) throw StateError("label(): environment has no labels");
  check_ids(prompt, action);
  return labels_->label[prompt][action];
}

LabelId Environment::target_label(PromptId prompt) const {
  if (!labels_) throw StateError("target_label(): environment has no labels");
  if (prompt >= n_prompts()) throw IndexError("prompt id out of range");
  return labels_->target[prompt];
}

double Environment::label_reward(PromptId prompt, LabelId label) const {
  if (!labels_) throw StateError("label_reward(): environment has no labels");
  if (prompt >= n_prompts()) throw IndexError("prompt id out of range");
  const auto& row = labels_->label[prompt];
  for (ActionId y = 0; y < row.size(); ++y) {
    if (row[y] == label) return rewards_(prompt, y);
  }
  throw IndexError("label " + std::to_string(label) + " not used on prompt " +
                   std::to_string(prompt));
}

std::span<const double> Environment::reward_row(PromptId prompt) const {
  if (prompt >= n_prompts()) throw IndexError("prompt id out of range");
  return rewards_.row(prompt);
}

Environment build_gaussian_bandit(std::size_t n_actions, std::uint64_t seed) {
  if (n_actions < 2) throw ArgumentError("build_gaussian_bandit: n_actions must be >= 2");
  Rng rng = Rng::substream(seed, {0x6761757373ULL});
  DenseMatrix rewards(1, n_actions);
  for (double& r : rewards.values()) r = rng.normal();
  return Environment(std::move(rewards));
}

namespace {

// Label assignment for one prompt: a random permutation of a multiset that
// contains every label at least once and otherwise uniform labels.
std::vector<LabelId> assign_labels(std::size_t n_actions, std::size_t n_labels,
                                   Rng& rng) {
  std::vector<LabelId> labels(n_actions);
  for (std::size_t y = 0; y < n_actions; ++y) {
    labels[y] = y < n_labels ? y : rng.uniform_index(n_labels);
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

}  // namespace

Environment build_labeled_bandit(std::size_t n_actions, std::size_t n_labels,
                                 std::uint64_t seed) {
  if (n_labels < 2) throw ArgumentError("build_labeled_bandit: n_labels must be >= 2");
  if (n_labels > n_actions) {
    throw ArgumentError("build_labeled_bandit: n_labels must not exceed n_actions");
  }
  Rng rng = Rng::substream(seed, {0x6c6162656cULL});
  Environment::Labels labels;
  labels.n_labels = n_labels;
  labels.label.push_back(assign_labels(n_actions, n_labels, rng));
  labels.target.push_back(rng.uniform_index(n_labels));
  DenseMatrix rewards(1, n_actions);
  for (ActionId y = 0; y < n_actions; ++y) {
    rewards(0, y) = labels.label[0][y] == labels.target[0] ? 1.0 : -1.0;
  }
  return Environment(std::move(rewards), std::move(labels));
}

Environment build_difficulty_env(std::span<const double> success_fraction,
                                 std::size_t n_actions, std::size_t n_labels,
                                 std::uint64_t seed) {
  if (success_fraction.empty()) {
    throw ArgumentError("build_difficulty_env: need at least one prompt");
  }
  if (n_labels < 2 || n_labels > n_actions) {
    throw ArgumentError("build_difficulty_env: need 2 <= n_labels <= n_actions");
  }
  const std::size_t n_prompts = success_fraction.size();
  Rng rng = Rng::substream(seed, {0x6469666669ULL});
  Environment::Labels labels;
  labels.n_labels = n_labels;
  DenseMatrix rewards(n_prompts, n_actions);
  for (PromptId x = 0; x < n_prompts; ++x) {
    const double f = success_fraction[x];
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ArgumentError("build_difficulty_env: success fraction must be in [0, 1]");
    }
    const LabelId target = rng.uniform_index(n_labels);
    auto n_hit = static_cast<std::size_t>(std::llround(f * static_cast<double>(n_actions)));
    n_hit = std::clamp<std::size_t>(n_hit, 1, n_actions - 1);
    std::vector<LabelId> row(n_actions);
    std::vector<LabelId> others;
    for (LabelId l = 0; l < n_labels; ++l) {
      if (l != target) others.push_back(l);
    }
    for (ActionId y = 0; y < n_actions; ++y) {
      row[y] = y < n_hit ? target : others[(y - n_hit) % others.size()];
    }
    std::shuffle(row.begin(), row.end(), rng);
    for (ActionId y = 0; y < n_actions; ++y) rewards(x, y) = row[y] == target ? 1.0 : -1.0;
    labels.label.push_back(std::move(row));
    labels.target.push_back(target);
  }
  return Environment(std::move(rewards), std::move(labels));
}

}  // namespace ksample
