#ifndef KSAMPLE_TESTS_FIXTURES_HPP_
#define KSAMPLE_TESTS_FIXTURES_HPP_

#include <cmath>
#include <vector>

#include "ksample/ksample.hpp"

namespace ksample::testing {

inline Environment single_prompt_env(std::vector<double> rewards) {
  const std::size_t n = rewards.size();
  return Environment(DenseMatrix(1, n, std::move(rewards)));
}

// One prompt; action a carries label labels[a]; reward +1 on the target.
inline Environment labeled_env(std::vector<LabelId> labels, LabelId target,
                               std::size_t n_labels) {
  const std::size_t n = labels.size();
  DenseMatrix r(1, n);
  for (std::size_t a = 0; a < n; ++a) r(0, a) = labels[a] == target ? 1.0 : -1.0;
  Environment::Labels l;
  l.label = {std::move(labels)};
  l.target = {target};
  l.n_labels = n_labels;
  return Environment(std::move(r), std::move(l));
}

inline PolicyParams row_policy(std::vector<double> logits) {
  const std::size_t n = logits.size();
  return PolicyParams::from_logits(DenseMatrix(1, n, std::move(logits)));
}

// Batch with the given rewards; actions are 0..k-1 (wrapped at n_actions).
inline SampleBatch reward_batch(std::vector<double> rewards, std::size_t n_actions = 0) {
  SampleBatch b;
  b.rewards = std::move(rewards);
  const std::size_t k = b.rewards.size();
  const std::size_t n = n_actions == 0 ? k : n_actions;
  for (std::size_t i = 0; i < k; ++i) b.actions.push_back(i % n);
  return b;
}

inline SampleBatch label_batch(std::vector<LabelId> labels, LabelId target) {
  SampleBatch b;
  for (LabelId l : labels) {
    b.actions.push_back(l);
    b.rewards.push_back(l == target ? 1.0 : -1.0);
  }
  b.labels = std::move(labels);
  return b;
}

}  // namespace ksample::testing

#endif  // KSAMPLE_TESTS_FIXTURES_HPP_
