#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"

namespace ksample {
namespace {

TEST(Serialization, EnvironmentRoundTripsExactly) {
  for (const auto& env : {build_gaussian_bandit(30, 4), build_labeled_bandit(9, 3, 2),
                          build_difficulty_env(std::vector<double>{0.3, 0.7}, 6, 3, 1)}) {
    EXPECT_EQ(environment_from_json(environment_to_json(env)), env);
  }
}

TEST(Serialization, EnvironmentRejectsPartialLabels) {
  EXPECT_THROW(environment_from_json(
                   R"({"format":"ksample-environment/1","n_prompts":1,"n_actions":2,
                       "rewards":[[1,-1]],"labels":[[0,1]]})"),
               ArgumentError);
  EXPECT_THROW(environment_from_json(R"({"format":"ksample-environment/1","n_prompts":1})"),
               ArgumentError);
  EXPECT_THROW(environment_from_json("not json"), ArgumentError);
}

TEST(Serialization, ParamsRoundTripExactly) {
  DenseMatrix m(2, 3);
  Rng rng(1);
  for (double& x : m.values()) x = rng.normal() * 1e3;
  const auto p = PolicyParams::from_logits(m);
  EXPECT_EQ(params_from_json(params_to_json(p)), p);
}

TEST(Serialization, KindsRoundTrip) {
  for (const auto& a : {AggregatorKind::mean(), AggregatorKind::max(),
                        AggregatorKind::softmax(2.5), AggregatorKind::majority(),
                        AggregatorKind::majority(TieRule::kSampled, 17)}) {
    EXPECT_EQ(aggregator_from_json(aggregator_to_json(a)), a);
  }
  for (const auto& e :
       {EstimatorKind::naive(), EstimatorKind::loo(), EstimatorKind::demeaned(),
        EstimatorKind::leave_p_out(3), EstimatorKind::ppo(EffectiveReward::kPassK, 0.3, 0.1),
        EstimatorKind::grpo(EffectiveReward::kBiasedPassK, true, 0.25)}) {
    EXPECT_EQ(estimator_from_json(estimator_to_json(e)), e);
  }
  EXPECT_THROW(estimator_from_json(R"({"tag":"reinforce"})"), ArgumentError);
}

TEST(Serialization, TextFilesCreateParents) {
  const auto dir = std::filesystem::temp_directory_path() / "ksample_ser_test";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(read_text_file(dir / "a" / "b.txt"), "hello");
  EXPECT_THROW(read_text_file(dir / "missing.txt"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ksample
