#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "ksample_cli/csv.hpp"

namespace ksample::cli {
namespace {

MetricsRecord record(std::size_t step, double mean, double kl, bool majority) {
  MetricsRecord r;
  r.step = step;
  r.mean_reward = mean;
  r.kl = kl;
  r.pass_at = {{1, mean}, {4, mean + 1.0}};
  if (majority) r.majority_at = std::map<std::size_t, double>{{1, mean}, {4, mean * 0.5}};
  return r;
}

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(MetricsCsv, SchemaCommentHeaderAndEmptyAbsentFields) {
  const MetricsLog log{record(0, 0.25, 0.0, false), record(10, 0.5, 0.125, false)};
  const auto t = parse_csv(metrics_csv(log, {"loo", "max", 4}, 3, {1, 4}));
  ASSERT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.comments[0], " schema=ksample-metrics/1");
  EXPECT_EQ(t.header, (std::vector<std::string>{"step", "estimator", "aggregator", "k", "seed",
                                                "mean_reward", "kl", "pass_at_1", "pass_at_4",
                                                "majority_at_1", "majority_at_4"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "10");
  EXPECT_EQ(t.rows[1][4], "3");
  EXPECT_EQ(t.rows[1][5], "0.5");
  EXPECT_EQ(t.rows[1][9], "");
  EXPECT_EQ(t.rows[1][10], "");
}

TEST(MetricsCsv, CommasInNamesDoNotShiftColumns) {
  const MetricsLog log{record(0, 0.25, 0.0, true)};
  const auto t = parse_csv(metrics_csv(log, {"grpo(pass_k,std)", "max", 4}, 0, {1, 4}));
  EXPECT_EQ(t.rows[0].size(), t.header.size());
  EXPECT_EQ(t.rows[0][1], "grpo(pass_k;std)");
  EXPECT_EQ(t.rows[0][t.column("majority_at_4")], "0.125");
}

TEST(SummaryCsv, PerStepMeanAndPopulationStd) {
  const std::vector<MetricsLog> logs{{record(0, 1.0, 0.0, false), record(5, 2.0, 0.5, false)},
                                     {record(0, 3.0, 0.0, false), record(5, 6.0, 1.5, false)}};
  const auto t = parse_csv(summary_csv(logs, {"loo", "max", 4}, {1, 4}));
  EXPECT_EQ(t.comments[0], " schema=ksample-summary/1");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][t.column("n_seeds")], "2");
  EXPECT_EQ(std::stod(t.rows[1][t.column("mean_reward_mean")]), 4.0);
  EXPECT_EQ(std::stod(t.rows[1][t.column("mean_reward_std")]), 2.0);
  EXPECT_EQ(std::stod(t.rows[1][t.column("kl_mean")]), 1.0);
  EXPECT_EQ(std::stod(t.rows[1][t.column("pass_at_4_mean")]), 5.0);
  EXPECT_EQ(t.rows[1][t.column("majority_at_1_mean")], "");
}

TEST(SummaryCsv, RejectsMisalignedRuns) {
  const std::vector<MetricsLog> logs{{record(0, 1.0, 0.0, false)},
                                     {record(1, 3.0, 0.0, false)}};
  EXPECT_THROW(summary_csv(logs, {"loo", "max", 4}, {1}), std::invalid_argument);
  EXPECT_THROW(summary_csv({}, {"loo", "max", 4}, {1}), std::invalid_argument);
}

TEST(CsvTable, MissingColumnIsNamed) {
  const auto t = parse_csv("# c\na,b\n1,2\n");
  try {
    t.column("zeta");
    FAIL();
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("zeta"), std::string::npos);
  }
}

}  // namespace
}  // namespace ksample::cli
