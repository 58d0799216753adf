#include "ksample/bandit_reproduction.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>

#include "ksample/environment.hpp"
#include "ksample/errors.hpp"

namespace ksample {

namespace {

constexpr std::size_t kMeanLoo = 0;
constexpr std::size_t kLooMax = 1;
constexpr std::size_t kDemeanedMax = 2;

double fraction(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

std::string percent(std::size_t hits, std::size_t total) {
  std::ostringstream os;
  os << hits << "/" << total;
  return os.str();
}

Figure1Check make_check(std::string id, std::string description) {
  Figure1Check c;
  c.id = std::move(id);
  c.description = std::move(description);
  return c;
}

}  // namespace

std::vector<Figure1Variant> figure1_variants() {
  return {{"mean-loo", EstimatorKind::loo(), AggregatorKind::mean()},
          {"loo-max", EstimatorKind::loo(), AggregatorKind::max()},
          {"demeaned-max", EstimatorKind::demeaned(), AggregatorKind::max()}};
}

std::optional<double> pass_at_kl_budget(const MetricsLog& log, double budget, std::size_t k) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].kl < budget) continue;
    const double here = log[i].pass_at.at(k);
    if (i == 0) return here;
    const double kl0 = log[i - 1].kl;
    const double kl1 = log[i].kl;
    const double before = log[i - 1].pass_at.at(k);
    const double t = kl1 > kl0 ? (budget - kl0) / (kl1 - kl0) : 1.0;
    return before + t * (here - before);
  }
  return std::nullopt;
}

double early_pass_at_k(const MetricsLog& log, std::size_t k, std::size_t last_step) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& rec : log) {
    if (rec.step < 1 || rec.step > last_step) continue;
    sum += rec.pass_at.at(k);
    ++n;
  }
  if (n == 0) throw ArgumentError("no metrics records within the early window");
  return sum / static_cast<double>(n);
}

bool Figure1Report::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

std::vector<Figure1Check> score_figure1(const std::vector<Figure1SeedRun>& runs,
                                        const Figure1Options& opt) {
  const std::size_t n = runs.size();
  std::vector<Figure1Check> checks;

  {
    Figure1Check a = make_check("a", "mean-loo reaches the highest final mean reward");
    std::size_t hits = 0;
    for (const auto& run : runs) {
      const double m = run.logs[kMeanLoo].back().mean_reward;
      if (m >= run.logs[kLooMax].back().mean_reward &&
          m >= run.logs[kDemeanedMax].back().mean_reward) {
        ++hits;
      }
    }
    a.worst_fraction = fraction(hits, n);
    a.passed = a.worst_fraction >= opt.required_fraction;
    a.detail = percent(hits, n) + " seeds";
    checks.push_back(a);
  }

  {
    Figure1Check b = make_check("b", "loo-max and demeaned-max beat mean-loo on pass@k at matched KL budgets");
    std::ostringstream detail;
    detail << std::setprecision(3);
    double worst = 1.0;
    std::size_t grid_points = 0;
    for (double g = opt.kl_grid_start; g <= opt.kl_grid_limit + 1e-12; g += opt.kl_grid_step) {
      std::size_t eligible = 0;
      std::size_t loo_hits = 0;
      std::size_t dem_hits = 0;
      for (const auto& run : runs) {
        const auto base = pass_at_kl_budget(run.logs[kMeanLoo], g, opt.k);
        const auto loo = pass_at_kl_budget(run.logs[kLooMax], g, opt.k);
        const auto dem = pass_at_kl_budget(run.logs[kDemeanedMax], g, opt.k);
        if (!base || !loo || !dem) continue;
        ++eligible;
        if (*loo > *base) ++loo_hits;
        if (*dem > *base) ++dem_hits;
      }
      if (eligible < opt.min_eligible_seeds) break;
      ++grid_points;
      const double fl = fraction(loo_hits, eligible);
      const double fd = fraction(dem_hits, eligible);
      worst = std::min({worst, fl, fd});
      detail << "kl=" << g << ": loo-max " << percent(loo_hits, eligible) << ", demeaned-max "
             << percent(dem_hits, eligible) << "; ";
    }
    if (grid_points == 0) {
      worst = 0.0;
      detail << "no KL grid point reached by enough seeds";
    }
    b.worst_fraction = worst;
    b.passed = grid_points > 0 && worst >= opt.required_fraction;
    b.detail = detail.str();
    checks.push_back(b);
  }

  {
    Figure1Check c = make_check("c", "loo-max improves pass@k faster than mean-loo over the early window");
    std::size_t hits = 0;
    for (const auto& run : runs) {
      if (early_pass_at_k(run.logs[kLooMax], opt.k, opt.early_steps) >
          early_pass_at_k(run.logs[kMeanLoo], opt.k, opt.early_steps)) {
        ++hits;
      }
    }
    c.worst_fraction = fraction(hits, n);
    c.passed = c.worst_fraction >= opt.required_fraction;
    c.detail = percent(hits, n) + " seeds (mean pass@k over steps 1.." +
               std::to_string(opt.early_steps) + ")";
    checks.push_back(c);
  }
  return checks;
}

Figure1Report run_figure1(const Figure1Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  Figure1Report report;
  const auto variants = figure1_variants();
  for (std::size_t s = 0; s < opt.seeds; ++s) {
    const std::uint64_t seed = opt.first_seed + s;
    const Environment env = build_gaussian_bandit(opt.n_actions, seed);
    const PolicyParams init = PolicyParams::uniform(1, opt.n_actions);
    Figure1SeedRun run{seed, {}};
    for (const auto& v : variants) {
      TrainConfig cfg;
      cfg.estimator = v.estimator;
      cfg.aggregator = v.aggregator;
      cfg.k = opt.k;
      cfg.learning_rate = opt.learning_rate;
      cfg.steps = opt.steps;
      cfg.eval_every = opt.eval_every;
      cfg.eval_ks = {opt.k};
      cfg.seed = seed;
      run.logs.push_back(train(cfg, env, init).log);
    }
    report.runs.push_back(std::move(run));
  }
  report.checks = score_figure1(report.runs, opt);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string format_figure1_report(const Figure1Report& report) {
  std::ostringstream os;
  os << "bandit reproduction: " << report.runs.size() << " seeds, " << std::fixed
     << std::setprecision(1) << report.seconds << " s\n";
  for (const auto& c : report.checks) {
    os << "  [" << (c.passed ? "PASS" : "FAIL") << "] (" << c.id << ") " << c.description
       << ": " << c.detail << "\n";
  }
  return os.str();
}

}  // namespace ksample
