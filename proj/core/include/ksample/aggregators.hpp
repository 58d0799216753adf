#ifndef KSAMPLE_AGGREGATORS_HPP_
#define KSAMPLE_AGGREGATORS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksample/environment.hpp"
#include "ksample/policy.hpp"
#include "ksample/rng.hpp"

namespace ksample {

// One prompt's k i.i.d. samples together with their rewards and, for
// majority voting, their answer labels.
struct SampleBatch {
  PromptId prompt = 0;
  std::vector<ActionId> actions;
  std::vector<double> rewards;
  std::optional<std::vector<LabelId>> labels;

  std::size_t k() const { return actions.size(); }
  // Throws ArgumentError when the per-sample vectors disagree in length.
  void validate() const;
};

// Looks rewards (and labels, when the environment has them) up for `actions`.
SampleBatch make_batch(const Environment& env, PromptId prompt,
                       std::vector<ActionId> actions);

enum class AggregatorTag { kMean, kMax, kMajority, kSoftmax };

// How majority voting resolves a tie between several modal labels.
//   kExpected: f is the average reward over the tied labels (deterministic).
//   kSampled: one tied label is drawn uniformly at random.
enum class TieRule { kExpected, kSampled };

struct AggregatorKind {
  AggregatorTag tag = AggregatorTag::kMean;
  double beta = 0.0;
  TieRule tie_rule = TieRule::kExpected;
  std::uint64_t tie_seed = 0;

  static AggregatorKind mean() { return {AggregatorTag::kMean}; }
  static AggregatorKind max() { return {AggregatorTag::kMax}; }
  static AggregatorKind majority(TieRule rule = TieRule::kExpected,
                                 std::uint64_t seed = 0) {
    return {AggregatorTag::kMajority, 0.0, rule, seed};
  }
  static AggregatorKind softmax(double beta) {
    return {AggregatorTag::kSoftmax, beta};
  }

  // "mean", "max", "majority", "majority(sampled)", "softmax(2.5)".
  std::string name() const;
  void validate() const;
  bool operator==(const AggregatorKind&) const = default;
};

enum class AdvantageKind { kLeaveOneOut, kDemeaned };

struct AdvantageVector {
  std::vector<double> values;
  AdvantageKind kind = AdvantageKind::kLeaveOneOut;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

// f(y_1..y_k).
double aggregate(const AggregatorKind& kind, const SampleBatch& batch);

// f(y_{-i}): the aggregate with sample i removed. Requires k >= 2.
double leave_one_out(const AggregatorKind& kind, const SampleBatch& batch,
                     std::size_t i);

// A_i = f(y) - f(y_{-i}).
AdvantageVector advantages(const AggregatorKind& kind, const SampleBatch& batch);

// A'_i = A_i - mean_j A_j.
AdvantageVector demeaned_advantages(const AggregatorKind& kind,
                                    const SampleBatch& batch);

// Modal label(s) of `labels`. With kExpected all tied labels are returned in
// ascending order; with kSampled exactly one is drawn using `rng`.
std::vector<LabelId> majority(std::span<const LabelId> labels, TieRule rule,
                              Rng* rng = nullptr);

}  // namespace ksample

#endif  // KSAMPLE_AGGREGATORS_HPP_
