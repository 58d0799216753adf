#ifndef KSAMPLE_IDENTITY_SUITE_HPP_
#define KSAMPLE_IDENTITY_SUITE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ksample/aggregators.hpp"
#include "ksample/environment.hpp"
#include "ksample/estimators.hpp"
#include "ksample/matrix.hpp"
#include "ksample/policy.hpp"
#include "ksample/rng.hpp"

namespace ksample {

// A small problem the oracle can enumerate exhaustively.
struct Instance {
  PolicyParams params;
  Environment env;
  std::size_t k;
  AggregatorKind kind;
};

struct InstanceShape {
  std::size_t min_actions = 2;
  std::size_t max_actions = 5;
  std::size_t min_k = 2;
  std::size_t max_k = 3;
  std::size_t max_prompts = 2;
  double logit_range = 2.0;
};

// Logits uniform in [-range, range]. Mean/max/softmax instances get rewards
// uniform in [0, 1] (softmax beta uniform in [0.5, 4]); majority instances
// get a labeled table with +1 on the target label and -1 elsewhere.
Instance random_instance(Rng& rng, AggregatorTag tag, const InstanceShape& shape = {});

std::string instance_to_json(const Instance& inst);

// Estimators under test. The suite calls through this table so a deliberately
// broken implementation can be swapped in to confirm the checks catch it.
struct EstimatorTable {
  using Fn = std::function<GradientTensor(const AggregatorKind&, const SampleBatch&,
                                          const PolicyParams&)>;
  using PFn = std::function<GradientTensor(const AggregatorKind&, const SampleBatch&,
                                           const PolicyParams&, std::size_t)>;
  Fn naive = estimate_naive;
  Fn loo = estimate_loo;
  Fn demeaned = estimate_demeaned;
  PFn leave_p_out = estimate_leave_p_out;
};

struct Measurement {
  std::string name;
  double observed = 0.0;  // max error, or a fraction for ratio checks
  double threshold = 0.0;
  bool higher_is_better = false;

  bool ok() const { return higher_is_better ? observed >= threshold : observed <= threshold; }
};

struct IdentityResult {
  std::string id;
  std::string description;
  bool passed = false;
  std::size_t cases = 0;
  std::vector<Measurement> measurements;
  std::string detail;
  std::optional<std::string> failing_instance;  // JSON replay record
  double seconds = 0.0;
};

struct IdentityOptions {
  std::uint64_t seed = 20240917;
  std::size_t exact_instances = 50;
  std::size_t sparse_batches = 10'000;
  std::size_t variance_instances = 50;
  std::size_t variance_draws = 100'000;
  double variance_required_fraction = 0.95;
  std::size_t leave_p_out_batches = 100;
  std::size_t leave_p_out_instances = 50;
  std::size_t finite_difference_instances = 20;
  double finite_difference_eps = 1e-5;
  std::size_t majority_batches = 10'000;
  std::size_t reduction_batches = 1'000;
  EstimatorTable estimators;
};

// Exact expectation of the LOO (and naive) estimator equals the oracle
// gradient of the k-sample objective.
IdentityResult check_unbiasedness(const IdentityOptions& opt);
// Exact expectation of the demeaned estimator equals the gradient of the
// averaged leave-one-out objective; for max the objective gap is
// (1/k) E[r_(k) - r_(k-1)].
IdentityResult check_bias_identity(const IdentityOptions& opt);
// LOO/max equals (r_(k) - r_(k-1)) grad log pi(y_(k)) on distinct rewards.
IdentityResult check_sparse_rewrite(const IdentityOptions& opt);
// Monte Carlo variance of LOO versus the naive coupled estimator.
IdentityResult check_variance_ordering(const IdentityOptions& opt);
// p = 1 reproduces demeaned/max per batch; p = k - 1 is unbiased for the mean
// objective; every p is unbiased for its own objective.
IdentityResult check_leave_p_out_endpoints(const IdentityOptions& opt);
// Oracle gradient versus central differences of the exact objective.
IdentityResult check_finite_differences(const IdentityOptions& opt);
// Majority advantage is nonzero only for the modal label when it leads the
// runner-up by exactly one vote.
IdentityResult check_majority_condition(const IdentityOptions& opt);
// PPO pass_k at ratio 1 is (1/k) LOO/max; GRPO biased_pass_k without std
// normalisation is the demeaned effective-reward surrogate.
IdentityResult check_surrogate_reductions(const IdentityOptions& opt);

std::vector<IdentityResult> run_identity_suite(const IdentityOptions& opt = {});

// Human-readable report, one block per identity.
std::string format_report(const std::vector<IdentityResult>& results);

}  // namespace ksample

#endif  // KSAMPLE_IDENTITY_SUITE_HPP_
