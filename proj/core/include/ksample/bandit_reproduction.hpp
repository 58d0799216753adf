#ifndef KSAMPLE_BANDIT_REPRODUCTION_HPP_
#define KSAMPLE_BANDIT_REPRODUCTION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ksample/aggregators.hpp"
#include "ksample/estimators.hpp"
#include "ksample/trainer.hpp"

namespace ksample {

struct Figure1Variant {
  std::string name;
  EstimatorKind estimator;
  AggregatorKind aggregator;
};

// mean-loo, loo-max and demeaned-max, in that order.
std::vector<Figure1Variant> figure1_variants();

struct Figure1Options {
  std::size_t seeds = 20;
  std::uint64_t first_seed = 0;
  std::size_t n_actions = 100;
  std::size_t k = 4;
  double learning_rate = 1.0;
  std::size_t steps = 1000;
  std::size_t eval_every = 1;
  std::size_t early_steps = 200;
  double kl_grid_start = 0.5;
  double kl_grid_step = 0.25;
  double kl_grid_limit = 20.0;
  // A KL grid point is scored only when this many seeds reach it in all runs.
  std::size_t min_eligible_seeds = 10;
  double required_fraction = 0.8;
};

// pass@k at the first point where the run's KL reaches `budget`, linearly
// interpolated between the two bracketing records. Empty if never reached.
std::optional<double> pass_at_kl_budget(const MetricsLog& log, double budget, std::size_t k);

// Average pass@k over records with 1 <= step <= last_step.
double early_pass_at_k(const MetricsLog& log, std::size_t k, std::size_t last_step);

struct Figure1Check {
  std::string id;
  std::string description;
  bool passed = false;
  double worst_fraction = 0.0;
  std::string detail;
};

struct Figure1SeedRun {
  std::uint64_t seed = 0;
  std::vector<MetricsLog> logs;  // one per variant, figure1_variants() order
};

struct Figure1Report {
  std::vector<Figure1SeedRun> runs;
  std::vector<Figure1Check> checks;  // a, b, c
  double seconds = 0.0;
  bool passed() const;
};

// Trains every variant on a fresh Gaussian bandit per seed (environment and
// training stream both keyed by the seed, uniform initial policy).
Figure1Report run_figure1(const Figure1Options& options = {});

// Scores already-trained runs.
std::vector<Figure1Check> score_figure1(const std::vector<Figure1SeedRun>& runs,
                                        const Figure1Options& options);

std::string format_figure1_report(const Figure1Report& report);

}  // namespace ksample

#endif  // KSAMPLE_BANDIT_REPRODUCTION_HPP_
