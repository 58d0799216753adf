#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace ksample {
namespace {

MetricsRecord rec(std::size_t step, double kl, double pass4, double mean = 0.0) {
  MetricsRecord r;
  r.step = step;
  r.kl = kl;
  r.pass_at[4] = pass4;
  r.mean_reward = mean;
  return r;
}

TEST(PassAtKlBudget, InterpolatesAtFirstCrossing) {
  const MetricsLog log{rec(0, 0.0, 1.0), rec(1, 0.4, 1.2), rec(2, 0.8, 2.0), rec(3, 0.3, 5.0)};
  EXPECT_NEAR(*pass_at_kl_budget(log, 0.6, 4), 1.6, 1e-15);
  EXPECT_EQ(*pass_at_kl_budget(log, 0.0, 4), 1.0);
  EXPECT_FALSE(pass_at_kl_budget(log, 0.9, 4).has_value());
}

TEST(EarlyPassAtK, AveragesWindowExcludingStepZero) {
  const MetricsLog log{rec(0, 0.0, 100.0), rec(1, 0.1, 1.0), rec(2, 0.2, 3.0), rec(3, 0.3, 50.0)};
  EXPECT_DOUBLE_EQ(early_pass_at_k(log, 4, 2), 2.0);
}

TEST(ScoreFigure1, CountsSeedsPerCheck) {
  Figure1Options o;
  o.min_eligible_seeds = 1;
  o.kl_grid_limit = 0.5;
  o.early_steps = 1;
  // Seed where the max variants are better at KL 0.5 and early on, and
  // mean-loo has the best final mean reward.
  const MetricsLog base{rec(0, 0.0, 1.0, 0.0), rec(1, 1.0, 1.5, 2.0)};
  const MetricsLog good{rec(0, 0.0, 1.0, 0.0), rec(1, 1.0, 2.5, 1.0)};
  std::vector<Figure1SeedRun> runs{{0, {base, good, good}}};
  auto checks = score_figure1(runs, o);
  ASSERT_EQ(checks.size(), 3u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.id << " " << c.detail;
  runs.push_back({1, {good, base, base}});
  checks = score_figure1(runs, o);
  for (const auto& c : checks) {
    EXPECT_FALSE(c.passed) << c.id;
    EXPECT_DOUBLE_EQ(c.worst_fraction, 0.5);
  }
}

TEST(RunFigure1, SmallRunProducesLogsForEveryVariant) {
  Figure1Options o;
  o.seeds = 2;
  o.steps = 20;
  o.early_steps = 10;
  o.n_actions = 10;
  const auto report = run_figure1(o);
  ASSERT_EQ(report.runs.size(), 2u);
  for (const auto& run : report.runs) {
    ASSERT_EQ(run.logs.size(), figure1_variants().size());
    for (const auto& log : run.logs) EXPECT_EQ(log.size(), 21u);
  }
  EXPECT_EQ(report.checks.size(), 3u);
  EXPECT_FALSE(format_figure1_report(report).empty());
}

}  // namespace
}  // namespace ksample
