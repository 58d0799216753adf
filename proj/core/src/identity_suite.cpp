#include "ksample/identity_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"
#include "ksample/oracle.hpp"
#include "ksample/serialization.hpp"

namespace ksample {

using nlohmann::json;

namespace {

constexpr double kExactTol = 1e-10;
constexpr double kObjectiveGapTol = 1e-12;
constexpr double kSparseTol = 1e-15;
constexpr double kBatchTol = 1e-12;
constexpr double kFiniteDiffTol = 1e-6;

constexpr AggregatorTag kAllTags[] = {AggregatorTag::kMean, AggregatorTag::kMax,
                                      AggregatorTag::kMajority, AggregatorTag::kSoftmax};

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.uniform_index(hi - lo + 1);
}

double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

PolicyParams random_params(Rng& rng, std::size_t n_prompts, std::size_t n_actions,
                           double range) {
  DenseMatrix logits(n_prompts, n_actions);
  for (double& x : logits.values()) x = uniform_real(rng, -range, range);
  return PolicyParams::from_logits(std::move(logits));
}

json batch_json(const SampleBatch& b) {
  json j;
  j["prompt"] = b.prompt;
  j["actions"] = b.actions;
  j["rewards"] = b.rewards;
  if (b.labels) j["labels"] = *b.labels;
  return j;
}

std::string batch_replay(const PolicyParams& params, const SampleBatch& b,
                         const std::string& note) {
  json j;
  j["params"] = json::parse(params_to_json(params));
  j["batch"] = batch_json(b);
  j["note"] = note;
  return j.dump(1);
}

std::string instance_replay(const Instance& inst, const std::string& note) {
  json j = json::parse(instance_to_json(inst));
  j["note"] = note;
  return j.dump(1);
}

// Tracks the largest error and the first case that broke the tolerance.
struct ErrorTracker {
  ErrorTracker(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  std::string name;
  double tolerance;
  double worst = 0.0;
  std::optional<std::string> failure;

  template <typename ReplayFn>
  void observe(double err, ReplayFn&& replay) {
    if (!(err <= worst)) worst = std::isnan(err) ? INFINITY : err;
    if (!(err <= tolerance) && !failure) failure = replay();
  }
  Measurement measurement() const { return {name, worst, tolerance, false}; }
};

IdentityResult make_result(std::string id, std::string description) {
  IdentityResult r;
  r.id = std::move(id);
  r.description = std::move(description);
  return r;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(IdentityResult& r, std::initializer_list<const ErrorTracker*> trackers,
            const Stopwatch& sw) {
  r.passed = true;
  for (const ErrorTracker* t : trackers) {
    r.measurements.push_back(t->measurement());
    if (!r.measurements.back().ok()) r.passed = false;
    if (t->failure && !r.failing_instance) r.failing_instance = t->failure;
  }
  r.seconds = sw.seconds();
}

// Random batch with distinct continuous rewards.
SampleBatch random_batch(Rng& rng, const PolicyParams& params, std::size_t k) {
  SampleBatch b;
  b.prompt = 0;
  b.actions = sample_actions(params, 0, k, rng);
  b.rewards.resize(k);
  bool distinct = false;
  while (!distinct) {
    for (double& r : b.rewards) r = rng.normal();
    std::vector<double> s = b.rewards;
    std::sort(s.begin(), s.end());
    distinct = std::adjacent_find(s.begin(), s.end()) == s.end();
  }
  return b;
}

}  // namespace

Instance random_instance(Rng& rng, AggregatorTag tag, const InstanceShape& shape) {
  const std::size_t n_actions = uniform_between(rng, shape.min_actions, shape.max_actions);
  const std::size_t k = uniform_between(rng, shape.min_k, shape.max_k);
  const std::size_t n_prompts = uniform_between(rng, 1, shape.max_prompts);
  PolicyParams params = random_params(rng, n_prompts, n_actions, shape.logit_range);

  AggregatorKind kind;
  DenseMatrix rewards(n_prompts, n_actions);
  std::optional<Environment::Labels> labels;
  switch (tag) {
    case AggregatorTag::kMean:
      kind = AggregatorKind::mean();
      break;
    case AggregatorTag::kMax:
      kind = AggregatorKind::max();
      break;
    case AggregatorTag::kSoftmax:
      kind = AggregatorKind::softmax(uniform_real(rng, 0.5, 4.0));
      break;
    case AggregatorTag::kMajority:
      kind = AggregatorKind::majority();
      break;
  }
  if (tag == AggregatorTag::kMajority) {
    Environment::Labels l;
    l.n_labels = uniform_between(rng, 2, n_actions);
    for (PromptId x = 0; x < n_prompts; ++x) {
      std::vector<LabelId> row(n_actions);
      for (auto& a : row) a = rng.uniform_index(l.n_labels);
      const LabelId target = row[rng.uniform_index(n_actions)];
      for (ActionId y = 0; y < n_actions; ++y) rewards(x, y) = row[y] == target ? 1.0 : -1.0;
      l.label.push_back(std::move(row));
      l.target.push_back(target);
    }
    labels = std::move(l);
  } else {
    for (double& r : rewards.values()) r = rng.uniform();
  }
  return {std::move(params), Environment(std::move(rewards), std::move(labels)), k, kind};
}

std::string instance_to_json(const Instance& inst) {
  json j;
  j["format"] = "ksample-instance/1";
  j["k"] = inst.k;
  j["aggregator"] = json::parse(aggregator_to_json(inst.kind));
  j["params"] = json::parse(params_to_json(inst.params));
  j["environment"] = json::parse(environment_to_json(inst.env));
  return j.dump(1);
}

IdentityResult check_unbiasedness(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("unbiasedness",
      "E[LOO estimator] and E[naive estimator] equal the gradient of E[f(y)]");
  ErrorTracker loo("loo_vs_oracle_gradient", kExactTol);
  ErrorTracker naive("naive_vs_oracle_gradient", kExactTol);
  Rng rng = Rng::substream(opt.seed, {1});
  for (std::size_t i = 0; i < opt.exact_instances; ++i) {
    const Instance inst = random_instance(rng, kAllTags[i % 4]);
    const GradientTensor truth = exact_gradient(inst.kind, inst.params, inst.env, inst.k);
    const GradientTensor e_loo = exact_expectation_of(
        [&](const SampleBatch& b) { return opt.estimators.loo(inst.kind, b, inst.params); },
        inst.params, inst.env, inst.k);
    const GradientTensor e_naive = exact_expectation_of(
        [&](const SampleBatch& b) { return opt.estimators.naive(inst.kind, b, inst.params); },
        inst.params, inst.env, inst.k);
    loo.observe(max_abs_diff(e_loo, truth), [&] { return instance_replay(inst, "loo"); });
    naive.observe(max_abs_diff(e_naive, truth), [&] { return instance_replay(inst, "naive"); });
    ++r.cases;
  }
  finish(r, {&loo, &naive}, sw);
  return r;
}

IdentityResult check_bias_identity(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("bias_identity",
      "E[demeaned estimator] equals the gradient of E[(1/k) sum_i f(y_-i)]; "
                   "max objective gap equals (1/k) E[r_(k) - r_(k-1)]");
  ErrorTracker grad("demeaned_vs_biased_objective_gradient", kExactTol);
  ErrorTracker gap_grad("bias_gap_vs_bias_term_gradient", kExactTol);
  ErrorTracker gap("max_objective_gap_vs_top_gap", kObjectiveGapTol);
  ErrorTracker convex("max_biased_objective_vs_order_statistics", kObjectiveGapTol);
  Rng rng = Rng::substream(opt.seed, {2});
  for (std::size_t i = 0; i < opt.exact_instances; ++i) {
    const Instance inst = random_instance(rng, kAllTags[i % 4]);
    const auto& [params, env, k, kind] = inst;
    const GradientTensor e_dem = exact_expectation_of(
        [&](const SampleBatch& b) { return opt.estimators.demeaned(kind, b, params); },
        params, env, k);
    const GradientTensor target = biased_gradient(kind, params, env, k);
    grad.observe(max_abs_diff(e_dem, target), [&] { return instance_replay(inst, "demeaned"); });

    // Gap between the unbiased and the demeaned expectation is the gradient of
    // the bias term E[f(y) - (1/k) sum_i f(y_-i)].
    const GradientTensor bias_term = exact_functional_gradient(
        [&](const SampleBatch& b) {
          CompensatedSum s;
          for (std::size_t j = 0; j < b.k(); ++j) s.add(leave_one_out(kind, b, j));
          return aggregate(kind, b) - s.value() / static_cast<double>(b.k());
        },
        params, env, k);
    const GradientTensor unbiased = exact_gradient(kind, params, env, k);
    gap_grad.observe(max_abs_diff(unbiased - e_dem, bias_term),
                     [&] { return instance_replay(inst, "bias gap"); });

    if (kind.tag == AggregatorTag::kMax) {
      const double obj = exact_objective(kind, params, env, k);
      const double biased = biased_objective(kind, params, env, k);
      const double kd = static_cast<double>(k);
      gap.observe(std::abs((obj - biased) - expected_top_gap(params, env, k) / kd),
                  [&] { return instance_replay(inst, "objective gap"); });
      const double top = expected_order_statistic(params, env, k, k);
      const double second = expected_order_statistic(params, env, k, k - 1);
      convex.observe(std::abs(biased - ((kd - 1.0) / kd * top + second / kd)),
                     [&] { return instance_replay(inst, "convex combination"); });
    }
    ++r.cases;
  }
  finish(r, {&grad, &gap_grad, &gap, &convex}, sw);
  return r;
}

IdentityResult check_sparse_rewrite(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("sparse_rewrite",
      "LOO/max equals (r_(k) - r_(k-1)) grad log pi(y_(k)) on distinct rewards");
  ErrorTracker err("loo_max_vs_rewrite", kSparseTol);
  Rng rng = Rng::substream(opt.seed, {3});
  std::size_t bitwise = 0;
  for (std::size_t i = 0; i < opt.sparse_batches; ++i) {
    const std::size_t n_actions = uniform_between(rng, 2, 8);
    const std::size_t k = uniform_between(rng, 2, 8);
    const PolicyParams params = random_params(rng, 1, n_actions, 2.0);
    const SampleBatch b = random_batch(rng, params, k);
    const GradientTensor g = opt.estimators.loo(AggregatorKind::max(), b, params);

    std::vector<std::size_t> order(k);
    for (std::size_t j = 0; j < k; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return b.rewards[a] < b.rewards[c]; });
    const std::size_t best = order[k - 1];
    const double w = b.rewards[best] - b.rewards[order[k - 2]];
    const GradientTensor rewrite = logprob_grad(params, 0, b.actions[best]) * w;
    const double e = max_abs_diff(g, rewrite);
    if (g == rewrite) ++bitwise;
    err.observe(e, [&] { return batch_replay(params, b, "sparse rewrite"); });
    ++r.cases;
  }
  std::ostringstream d;
  d << bitwise << "/" << r.cases << " batches bitwise identical";
  r.detail = d.str();
  finish(r, {&err}, sw);
  return r;
}

IdentityResult check_variance_ordering(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("variance_ordering",
      "summed componentwise variance: LOO < naive on nonconstant-f instances");
  Rng rng = Rng::substream(opt.seed, {4});
  InstanceShape shape;
  shape.max_prompts = 1;
  std::size_t nonconstant = 0;
  std::size_t strictly_smaller = 0;
  std::size_t not_larger = 0;
  std::size_t exact_strict = 0;
  double ratio_sum = 0.0;
  double ratio_max = 0.0;
  std::optional<std::string> first_failure;
  for (std::size_t i = 0; i < opt.variance_instances; ++i) {
    const Instance inst = random_instance(rng, kAllTags[i % 4], shape);
    const auto& [params, env, k, kind] = inst;

    double f_lo = INFINITY;
    double f_hi = -INFINITY;
    exact_expectation(
        [&](const SampleBatch& b) {
          const double f = aggregate(kind, b);
          f_lo = std::min(f_lo, f);
          f_hi = std::max(f_hi, f);
          return 0.0;
        },
        params, env, k);
    ++r.cases;
    if (!(f_hi > f_lo)) continue;
    ++nonconstant;

    const std::size_t dim = params.n_actions();
    std::vector<CompensatedSum> s_loo(dim), ss_loo(dim), s_nv(dim), ss_nv(dim);
    Rng draw_rng = Rng::substream(opt.seed, {4, i});
    for (std::size_t t = 0; t < opt.variance_draws; ++t) {
      const SampleBatch b = make_batch(env, 0, sample_actions(params, 0, k, draw_rng));
      const GradientTensor gl = opt.estimators.loo(kind, b, params);
      const GradientTensor gn = opt.estimators.naive(kind, b, params);
      for (std::size_t a = 0; a < dim; ++a) {
        s_loo[a].add(gl(0, a));
        ss_loo[a].add(gl(0, a) * gl(0, a));
        s_nv[a].add(gn(0, a));
        ss_nv[a].add(gn(0, a) * gn(0, a));
      }
    }
    const double n = static_cast<double>(opt.variance_draws);
    double var_loo = 0.0;
    double var_nv = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      const double ml = s_loo[a].value() / n;
      const double mn = s_nv[a].value() / n;
      var_loo += std::max(0.0, ss_loo[a].value() / n - ml * ml) * n / (n - 1.0);
      var_nv += std::max(0.0, ss_nv[a].value() / n - mn * mn) * n / (n - 1.0);
    }
    const double ratio = var_nv > 0.0 ? var_loo / var_nv : INFINITY;
    ratio_sum += ratio;
    ratio_max = std::max(ratio_max, ratio);
    if (var_loo < var_nv) ++strictly_smaller;
    if (var_loo <= var_nv) ++not_larger;
    if (var_loo > var_nv && !first_failure) {
      first_failure = instance_replay(inst, "LOO variance above naive");
    }

    // Exact variances by enumeration, reported alongside.
    auto exact_trace = [&](const EstimatorTable::Fn& est) {
      const GradientTensor m = exact_expectation_of(
          [&](const SampleBatch& b) { return est(kind, b, params); }, params, env, k);
      const GradientTensor m2 = exact_expectation_of(
          [&](const SampleBatch& b) {
            GradientTensor g = est(kind, b, params);
            for (double& x : g.values()) x *= x;
            return g;
          },
          params, env, k);
      double tr = 0.0;
      for (std::size_t a = 0; a < dim; ++a) tr += m2(0, a) - m(0, a) * m(0, a);
      return tr;
    };
    if (exact_trace(opt.estimators.loo) < exact_trace(opt.estimators.naive)) ++exact_strict;
  }
  const double frac = nonconstant ? static_cast<double>(strictly_smaller) / nonconstant : 0.0;
  r.measurements.push_back(
      {"fraction_loo_strictly_smaller", frac, opt.variance_required_fraction, true});
  r.passed = nonconstant > 0 && frac >= opt.variance_required_fraction;
  std::ostringstream d;
  d << std::setprecision(6) << "nonconstant=" << nonconstant
    << " strictly_smaller=" << strictly_smaller << " not_larger=" << not_larger
    << " mean_ratio(loo/naive)=" << (nonconstant ? ratio_sum / nonconstant : 0.0)
    << " max_ratio=" << ratio_max << " exact_strictly_smaller=" << exact_strict;
  r.detail = d.str();
  if (!r.passed) r.failing_instance = first_failure;
  r.seconds = sw.seconds();
  return r;
}

IdentityResult check_leave_p_out_endpoints(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("leave_p_out",
      "p=1 matches demeaned/max per batch; p=k-1 is unbiased for the mean "
                   "objective; each p is unbiased for its own objective");
  ErrorTracker p1("p1_vs_demeaned_max", kBatchTol);
  ErrorTracker pk("p_k_minus_1_vs_mean_gradient", kExactTol);
  ErrorTracker any_p("p_vs_leave_p_out_objective_gradient", kExactTol);
  Rng rng = Rng::substream(opt.seed, {5});
  const auto max_kind = AggregatorKind::max();
  for (std::size_t i = 0; i < opt.leave_p_out_batches; ++i) {
    const std::size_t n_actions = uniform_between(rng, 2, 8);
    const std::size_t k = uniform_between(rng, 2, 8);
    const PolicyParams params = random_params(rng, 1, n_actions, 2.0);
    const SampleBatch b = random_batch(rng, params, k);
    const GradientTensor g1 = opt.estimators.leave_p_out(max_kind, b, params, 1);
    const GradientTensor gd = opt.estimators.demeaned(max_kind, b, params);
    p1.observe(max_abs_diff(g1, gd), [&] { return batch_replay(params, b, "p=1"); });
    ++r.cases;
  }
  InstanceShape shape;
  shape.max_k = 4;
  for (std::size_t i = 0; i < opt.leave_p_out_instances; ++i) {
    const Instance inst = random_instance(rng, AggregatorTag::kMax, shape);
    const auto& [params, env, k, kind] = inst;
    for (std::size_t p = 1; p < k; ++p) {
      const GradientTensor e = exact_expectation_of(
          [&, p](const SampleBatch& b) { return opt.estimators.leave_p_out(kind, b, params, p); },
          params, env, k);
      any_p.observe(max_abs_diff(e, leave_p_out_gradient(params, env, k, p)),
                    [&] { return instance_replay(inst, "p=" + std::to_string(p)); });
      if (p == k - 1) {
        const GradientTensor mean_grad = exact_gradient(AggregatorKind::mean(), params, env, k);
        pk.observe(max_abs_diff(e, mean_grad), [&] { return instance_replay(inst, "p=k-1"); });
      }
    }
    ++r.cases;
  }
  finish(r, {&p1, &pk, &any_p}, sw);
  return r;
}

IdentityResult check_finite_differences(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("finite_differences",
      "oracle gradient matches central differences of the exact objective");
  std::ostringstream tol_name;
  tol_name << "oracle_vs_central_differences(eps=" << opt.finite_difference_eps << ")";
  ErrorTracker err(tol_name.str(), kFiniteDiffTol);
  Rng rng = Rng::substream(opt.seed, {6});
  for (std::size_t i = 0; i < opt.finite_difference_instances; ++i) {
    const Instance inst = random_instance(rng, kAllTags[i % 4]);
    const GradientTensor g = exact_gradient(inst.kind, inst.params, inst.env, inst.k);
    const GradientTensor fd = finite_diff_gradient(inst.kind, inst.params, inst.env, inst.k,
                                                   opt.finite_difference_eps);
    err.observe(max_abs_diff(g, fd), [&] { return instance_replay(inst, "finite differences"); });
    ++r.cases;
  }
  finish(r, {&err}, sw);
  return r;
}

IdentityResult check_majority_condition(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("majority_condition",
      "majority advantage nonzero only if a_i is modal and leads by exactly one");
  ErrorTracker violations("violations", 0.0);
  Rng rng = Rng::substream(opt.seed, {8});
  std::size_t nonzero = 0;
  const auto kind = AggregatorKind::majority();
  while (r.cases < opt.majority_batches) {
    const std::size_t k = uniform_between(rng, 2, 9);
    const std::size_t n_labels = uniform_between(rng, 2, 5);
    const LabelId target = rng.uniform_index(n_labels);
    SampleBatch b;
    b.labels.emplace(k);
    for (std::size_t i = 0; i < k; ++i) {
      (*b.labels)[i] = rng.uniform_index(n_labels);
      b.actions.push_back((*b.labels)[i]);
      b.rewards.push_back((*b.labels)[i] == target ? 1.0 : -1.0);
    }
    std::vector<std::size_t> counts(n_labels, 0);
    for (LabelId l : *b.labels) ++counts[l];
    std::vector<std::size_t> sorted = counts;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] == sorted[1]) continue;  // tie for the majority: skip
    const LabelId modal = static_cast<LabelId>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    const AdvantageVector a = advantages(kind, b);
    double bad = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (a[i] == 0.0) continue;
      ++nonzero;
      const bool allowed = (*b.labels)[i] == modal && sorted[0] == sorted[1] + 1;
      if (!allowed) bad += 1.0;
    }
    violations.observe(bad, [&] {
      json j;
      j["batch"] = batch_json(b);
      j["note"] = "majority advantage condition";
      return j.dump(1);
    });
    ++r.cases;
  }
  r.detail = std::to_string(nonzero) + " nonzero advantages observed";
  finish(r, {&violations}, sw);
  return r;
}

IdentityResult check_surrogate_reductions(const IdentityOptions& opt) {
  Stopwatch sw;
  IdentityResult r = make_result("ppo_grpo_reductions",
      "PPO pass_k (ratio 1, no value, huge epsilon) = (1/k) LOO/max; GRPO "
                   "biased_pass_k without std = demeaned effective-reward surrogate");
  ErrorTracker ppo("ppo_pass_k_vs_loo_max_over_k", kBatchTol);
  ErrorTracker grpo("grpo_biased_vs_demeaned_surrogate", kBatchTol);
  ErrorTracker grpo_dem("grpo_biased_vs_demeaned_max_over_k", kBatchTol);
  Rng rng = Rng::substream(opt.seed, {9});
  constexpr double kHugeEpsilon = 1e9;
  const auto max_kind = AggregatorKind::max();
  for (std::size_t i = 0; i < opt.reduction_batches; ++i) {
    const std::size_t n_actions = uniform_between(rng, 2, 8);
    const std::size_t k = uniform_between(rng, 2, 8);
    const PolicyParams params = random_params(rng, 1, n_actions, 2.0);
    SampleBatch b;
    b.actions = sample_actions(params, 0, k, rng);
    // Binary +/-1 rewards half the time, continuous otherwise.
    const bool binary = i % 2 == 0;
    for (std::size_t j = 0; j < k; ++j) {
      b.rewards.push_back(binary ? (rng.uniform() < 0.5 ? 1.0 : -1.0) : rng.normal());
    }
    const double inv_k = 1.0 / static_cast<double>(k);
    const ValueBaseline zero = ValueBaseline::zeros(1);

    const GradientTensor g_ppo =
        ppo_step_grad(b, params, params, zero, EffectiveReward::kPassK, kHugeEpsilon);
    const GradientTensor g_loo = opt.estimators.loo(max_kind, b, params) * inv_k;
    ppo.observe(max_abs_diff(g_ppo, g_loo), [&] { return batch_replay(params, b, "ppo"); });

    const GradientTensor g_grpo = grpo_step_grad(b, params, params, EffectiveReward::kBiasedPassK,
                                                 false, kHugeEpsilon);
    // Demeaned effective reward fed straight through the clipped surrogate.
    const auto eff = effective_reward(EffectiveReward::kBiasedPassK, b.rewards);
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j) w[j] = eff[j] * inv_k;
    const GradientTensor g_sur = weighted_score(params, 0, b.actions, w);
    grpo.observe(max_abs_diff(g_grpo, g_sur), [&] { return batch_replay(params, b, "grpo"); });
    const GradientTensor g_dem = opt.estimators.demeaned(max_kind, b, params) * inv_k;
    grpo_dem.observe(max_abs_diff(g_grpo, g_dem),
                     [&] { return batch_replay(params, b, "grpo vs demeaned"); });
    ++r.cases;
  }
  finish(r, {&ppo, &grpo, &grpo_dem}, sw);
  return r;
}

std::vector<IdentityResult> run_identity_suite(const IdentityOptions& opt) {
  return {check_unbiasedness(opt),          check_bias_identity(opt),
          check_sparse_rewrite(opt),        check_variance_ordering(opt),
          check_leave_p_out_endpoints(opt), check_finite_differences(opt),
          check_majority_condition(opt),    check_surrogate_reductions(opt)};
}

std::string format_report(const std::vector<IdentityResult>& results) {
  std::ostringstream os;
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  os << "ksample identity suite: " << passed << "/" << results.size() << " passed\n";
  for (const auto& r : results) {
    os << "\n[" << (r.passed ? "PASS" : "FAIL") << "] " << r.id << " (" << r.cases
       << " cases, " << std::fixed << std::setprecision(2) << r.seconds << " s)\n";
    os.unsetf(std::ios::floatfield);
    os << "  " << r.description << "\n";
    for (const auto& m : r.measurements) {
      os << "  " << (m.ok() ? "ok  " : "BAD ") << m.name << ": "
         << (m.higher_is_better ? "observed " : "max error ") << std::setprecision(3)
         << std::scientific << m.observed << (m.higher_is_better ? " >= " : " <= ")
         << m.threshold << "\n";
      os.unsetf(std::ios::floatfield);
    }
    if (!r.detail.empty()) os << "  " << r.detail << "\n";
  }
  return os.str();
}

}  // namespace ksample
