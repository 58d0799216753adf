#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"

namespace ksample {
namespace {

IdentityOptions quick_options() {
  IdentityOptions o;
  o.exact_instances = 12;
  o.sparse_batches = 500;
  o.variance_instances = 8;
  o.variance_draws = 20'000;
  o.leave_p_out_batches = 30;
  o.leave_p_out_instances = 10;
  o.finite_difference_instances = 8;
  o.majority_batches = 500;
  o.reduction_batches = 100;
  return o;
}

GradientTensor flipped_demeaned(const AggregatorKind& kind, const SampleBatch& b,
                                const PolicyParams& params) {
  return estimate_demeaned(kind, b, params) * -1.0;
}

TEST(IdentitySuite, CorrectEstimatorsPassEveryCheck) {
  for (const auto& r : run_identity_suite(quick_options())) {
    EXPECT_TRUE(r.passed) << r.id << "\n" << format_report({r});
    EXPECT_GT(r.cases, 0u);
    EXPECT_FALSE(r.measurements.empty());
  }
}

TEST(IdentitySuite, SignFlippedDemeanedIsCaught) {
  auto o = quick_options();
  o.estimators.demeaned = flipped_demeaned;
  const auto bias = check_bias_identity(o);
  EXPECT_FALSE(bias.passed);
  ASSERT_TRUE(bias.failing_instance.has_value());
  const auto j = nlohmann::json::parse(*bias.failing_instance);
  EXPECT_TRUE(j.contains("params"));
  EXPECT_TRUE(j.contains("environment"));
  EXPECT_FALSE(check_leave_p_out_endpoints(o).passed);
  EXPECT_FALSE(check_surrogate_reductions(o).passed);
}

TEST(IdentitySuite, BrokenLooIsCaught) {
  auto o = quick_options();
  o.estimators.loo = [](const AggregatorKind& kind, const SampleBatch& b,
                        const PolicyParams& params) {
    return estimate_loo(kind, b, params) * 1.001;
  };
  EXPECT_FALSE(check_unbiasedness(o).passed);
  EXPECT_FALSE(check_sparse_rewrite(o).passed);
}

TEST(IdentitySuite, ReportNamesEveryIdentityWithItsError) {
  const auto results = run_identity_suite(quick_options());
  const std::string report = format_report(results);
  for (const auto& r : results) {
    EXPECT_NE(report.find(r.id), std::string::npos);
    for (const auto& m : r.measurements) EXPECT_NE(report.find(m.name), std::string::npos);
  }
}

TEST(RandomInstance, RespectsShape) {
  Rng rng(3);
  InstanceShape s;
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_instance(rng, AggregatorTag::kMajority, s);
    EXPECT_GE(inst.env.n_actions(), s.min_actions);
    EXPECT_LE(inst.env.n_actions(), s.max_actions);
    EXPECT_GE(inst.k, s.min_k);
    EXPECT_LE(inst.k, s.max_k);
    EXPECT_TRUE(inst.env.has_labels());
    for (double x : inst.params.logits().values()) EXPECT_LE(std::abs(x), s.logit_range);
  }
}

}  // namespace
}  // namespace ksample
