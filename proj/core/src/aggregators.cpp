#include "ksample/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample {

void SampleBatch::validate() const {
  if (rewards.size() != actions.size()) {
    throw ArgumentError("SampleBatch: rewards and actions differ in length");
  }
  if (labels && labels->size() != actions.size()) {
    throw ArgumentError("SampleBatch: labels and actions differ in length");
  }
}

SampleBatch make_batch(const Environment& env, PromptId prompt,
                       std::vector<ActionId> actions) {
  SampleBatch b;
  b.prompt = prompt;
  b.rewards.reserve(actions.size());
  for (ActionId y : actions) b.rewards.push_back(env.reward(prompt, y));
  if (env.has_labels()) {
    std::vector<LabelId> labels;
    labels.reserve(actions.size());
    for (ActionId y : actions) labels.push_back(env.label(prompt, y));
    b.labels = std::move(labels);
  }
  b.actions = std::move(actions);
  return b;
}

std::string AggregatorKind::name() const {
  switch (tag) {
    case AggregatorTag::kMean:
      return "mean";
    case AggregatorTag::kMax:
      return "max";
    case AggregatorTag::kMajority:
      return tie_rule == TieRule::kExpected ? "majority" : "majority(sampled)";
    case AggregatorTag::kSoftmax: {
      std::ostringstream os;
      os << "softmax(" << beta << ")";
      return os.str();
    }
  }
  return "unknown";
}

void AggregatorKind::validate() const {
  if (tag == AggregatorTag::kSoftmax && !(std::isfinite(beta) && beta >= 0.0)) {
    throw ArgumentError("softmax aggregator needs a finite beta >= 0");
  }
}

std::vector<LabelId> majority(std::span<const LabelId> labels, TieRule rule,
                              Rng* rng) {
  if (labels.empty()) throw ArgumentError("majority: empty label list");
  std::map<LabelId, std::size_t> counts;
  for (LabelId l : labels) ++counts[l];
  std::size_t best = 0;
  for (const auto& [l, c] : counts) best = std::max(best, c);
  std::vector<LabelId> tied;
  for (const auto& [l, c] : counts) {
    if (c == best) tied.push_back(l);
  }
  if (rule == TieRule::kSampled && tied.size() > 1) {
    if (rng == nullptr) throw ArgumentError("majority: sampled tie rule needs an rng");
    return {tied[rng->uniform_index(tied.size())]};
  }
  return tied;
}

namespace {

constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

// True when every entry other than r[skip] holds the same value.
bool all_equal_excluding(std::span<const double> r, std::size_t skip) {
  std::optional<double> first;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == skip) continue;
    if (!first) {
      first = r[i];
    } else if (r[i] != *first) {
      return false;
    }
  }
  return true;
}

double first_excluding(std::span<const double> r, std::size_t skip) {
  return r[skip == 0 ? 1 : 0];
}

double mean_excluding(std::span<const double> r, std::size_t skip) {
  if (all_equal_excluding(r, skip)) return first_excluding(r, skip);
  CompensatedSum s;
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == skip) continue;
    s.add(r[i]);
    ++n;
  }
  return s.value() / static_cast<double>(n);
}

double max_excluding(std::span<const double> r, std::size_t skip) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i != skip) m = std::max(m, r[i]);
  }
  return m;
}

double softmax_excluding(std::span<const double> r, std::size_t skip, double beta) {
  if (all_equal_excluding(r, skip)) return first_excluding(r, skip);
  const double m = max_excluding(r, skip);
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == skip) continue;
    const double w = std::exp(beta * (r[i] - m));
    num.add(w * r[i]);
    den.add(w);
  }
  return num.value() / den.value();
}

// Stable hash of the label sequence, used to derive the tie-break stream of a
// sampled-tie aggregator so the same batch always resolves the same way.
std::uint64_t label_hash(std::span<const LabelId> labels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (LabelId l : labels) {
    h ^= static_cast<std::uint64_t>(l) + 0x9E3779B97F4A7C15ULL;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double majority_excluding(const AggregatorKind& kind, const SampleBatch& batch,
                          std::size_t skip) {
  if (!batch.labels) throw ArgumentError("majority aggregator needs labelled samples");
  const auto& all = *batch.labels;
  std::vector<LabelId> labels;
  std::map<LabelId, double> reward_of;
  labels.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i == skip) continue;
    labels.push_back(all[i]);
    reward_of.emplace(all[i], batch.rewards[i]);
  }
  std::vector<LabelId> winners;
  if (kind.tie_rule == TieRule::kSampled) {
    Rng rng = Rng::substream(kind.tie_seed, {label_hash(labels)});
    winners = majority(labels, TieRule::kSampled, &rng);
  } else {
    winners = majority(labels, TieRule::kExpected);
  }
  CompensatedSum s;
  for (LabelId l : winners) s.add(reward_of.at(l));
  return s.value() / static_cast<double>(winners.size());
}

double aggregate_excluding(const AggregatorKind& kind, const SampleBatch& batch,
                           std::size_t skip) {
  kind.validate();
  batch.validate();
  std::span<const double> r = batch.rewards;
  switch (kind.tag) {
    case AggregatorTag::kMean:
      return mean_excluding(r, skip);
    case AggregatorTag::kMax:
      return max_excluding(r, skip);
    case AggregatorTag::kSoftmax:
      return softmax_excluding(r, skip, kind.beta);
    case AggregatorTag::kMajority:
      return majority_excluding(kind, batch, skip);
  }
  throw ArgumentError("unknown aggregator");
}

}  // namespace

double aggregate(const AggregatorKind& kind, const SampleBatch& batch) {
  if (batch.k() == 0) throw ArgumentError("aggregate: empty batch");
  return aggregate_excluding(kind, batch, kNoSkip);
}

double leave_one_out(const AggregatorKind& kind, const SampleBatch& batch,
                     std::size_t i) {
  if (batch.k() < 2) throw ArgumentError("leave_one_out: needs k >= 2");
  if (i >= batch.k()) throw IndexError("leave_one_out: sample index out of range");
  return aggregate_excluding(kind, batch, i);
}

AdvantageVector advantages(const AggregatorKind& kind, const SampleBatch& batch) {
  if (batch.k() < 2) throw ArgumentError("advantages: needs k >= 2");
  const double f = aggregate(kind, batch);
  AdvantageVector out;
  out.kind = AdvantageKind::kLeaveOneOut;
  out.values.resize(batch.k());
  for (std::size_t i = 0; i < batch.k(); ++i) {
    out.values[i] = f - aggregate_excluding(kind, batch, i);
  }
  return out;
}

AdvantageVector demeaned_advantages(const AggregatorKind& kind,
                                    const SampleBatch& batch) {
  AdvantageVector out = advantages(kind, batch);
  const double mean = mean_of(out.values);
  for (double& a : out.values) a -= mean;
  out.kind = AdvantageKind::kDemeaned;
  return out;
}

}  // namespace ksample
