#include "ksample_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "json.hpp"
#include "ksample/errors.hpp"
#include "ksample/serialization.hpp"

namespace ksample::cli {

using nlohmann::json;

namespace {

constexpr const char* kConfigFormat = "ksample-config/1";

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw ConfigError(where + ": " + message);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing required key '" + key + "'");
  return obj.at(key);
}

std::size_t as_count(const json& v, const std::string& key, const std::string& where,
                     std::size_t min = 1) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
    fail(where, "'" + key + "' must be an integer >= " + std::to_string(min));
  }
  return v.get<std::size_t>();
}

std::uint64_t as_seed(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    fail(where, "'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number()) fail(where, "'" + key + "' must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_boolean()) fail(where, "'" + key + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_string()) fail(where, "'" + key + "' must be a string");
  return v.get<std::string>();
}

template <typename Parse>
auto via_core(Parse&& parse, const json& j, const std::string& where) {
  try {
    return parse(j.dump());
  } catch (const ArgumentError& e) {
    fail(where, e.what());
  }
}

EstimatorKind parse_estimator(const json& v, const std::string& where) {
  json obj = v.is_string() ? json{{"tag", v}} : v;
  if (!obj.is_object()) fail(where, "estimator must be a name or an object");
  const std::string tag = as_string(require(obj, "tag", where), "tag", where);
  if (tag == "naive" || tag == "loo" || tag == "demeaned") {
    reject_unknown(obj, {"tag"}, where);
  } else if (tag == "leave_p_out") {
    reject_unknown(obj, {"tag", "p"}, where);
    as_count(require(obj, "p", where), "p", where);
  } else if (tag == "ppo") {
    reject_unknown(obj, {"tag", "variant", "epsilon", "alpha"}, where);
    require(obj, "variant", where);
  } else if (tag == "grpo") {
    reject_unknown(obj, {"tag", "variant", "epsilon", "normalize_std"}, where);
    require(obj, "variant", where);
  } else {
    fail(where, "unknown estimator '" + tag + "'");
  }
  return via_core([](const std::string& s) { return estimator_from_json(s); }, obj, where);
}

AggregatorKind parse_aggregator(const json& v, const std::string& where) {
  json obj = v.is_string() ? json{{"tag", v}} : v;
  if (!obj.is_object()) fail(where, "aggregator must be a name or an object");
  const std::string tag = as_string(require(obj, "tag", where), "tag", where);
  if (tag == "mean" || tag == "max") {
    reject_unknown(obj, {"tag"}, where);
  } else if (tag == "softmax") {
    reject_unknown(obj, {"tag", "beta"}, where);
    as_real(require(obj, "beta", where), "beta", where);
  } else if (tag == "majority") {
    reject_unknown(obj, {"tag", "tie_rule", "tie_seed"}, where);
  } else {
    fail(where, "unknown aggregator '" + tag + "'");
  }
  return via_core([](const std::string& s) { return aggregator_from_json(s); }, obj, where);
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    out += ok ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void check_variant_name(const std::string& name, const std::string& where) {
  if (name.empty() || name == "." || name == ".." ||
      !std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
      })) {
    fail(where, "variant name '" + name + "' must use only letters, digits, '.', '-', '_'");
  }
}

EnvironmentSpec parse_environment(const json& v) {
  const std::string where = "config.environment";
  if (!v.is_object()) fail(where, "must be an object");
  EnvironmentSpec spec;
  const std::string type = as_string(require(v, "type", where), "type", where);
  if (type == "gaussian") {
    reject_unknown(v, {"type", "n_actions", "seed"}, where);
    spec.type = EnvironmentType::kGaussian;
    spec.n_actions = as_count(require(v, "n_actions", where), "n_actions", where, 2);
  } else if (type == "labeled") {
    reject_unknown(v, {"type", "n_actions", "n_labels", "seed"}, where);
    spec.type = EnvironmentType::kLabeled;
    spec.n_actions = as_count(require(v, "n_actions", where), "n_actions", where, 2);
    spec.n_labels = as_count(require(v, "n_labels", where), "n_labels", where, 2);
    if (spec.n_labels > spec.n_actions) fail(where, "'n_labels' must not exceed 'n_actions'");
  } else if (type == "difficulty") {
    reject_unknown(v, {"type", "success_fraction", "n_actions", "n_labels", "seed"}, where);
    spec.type = EnvironmentType::kDifficulty;
    spec.n_actions = as_count(require(v, "n_actions", where), "n_actions", where, 2);
    spec.n_labels = as_count(require(v, "n_labels", where), "n_labels", where, 2);
    const json& sf = require(v, "success_fraction", where);
    if (!sf.is_array() || sf.empty()) fail(where, "'success_fraction' must be a non-empty array");
    for (const auto& x : sf) {
      const double f = as_real(x, "success_fraction", where);
      if (!(f >= 0.0 && f <= 1.0)) fail(where, "'success_fraction' entries must be in [0, 1]");
      spec.success_fraction.push_back(f);
    }
  } else if (type == "file") {
    reject_unknown(v, {"type", "path"}, where);
    spec.type = EnvironmentType::kFile;
    spec.path = as_string(require(v, "path", where), "path", where);
  } else {
    fail(where, "unknown environment type '" + type + "'");
  }
  if (v.contains("seed")) spec.seed = as_seed(v.at("seed"), "seed", where);
  return spec;
}

json environment_to_config_json(const EnvironmentSpec& spec) {
  json j;
  switch (spec.type) {
    case EnvironmentType::kGaussian:
      j = {{"type", "gaussian"}, {"n_actions", spec.n_actions}};
      break;
    case EnvironmentType::kLabeled:
      j = {{"type", "labeled"}, {"n_actions", spec.n_actions}, {"n_labels", spec.n_labels}};
      break;
    case EnvironmentType::kDifficulty:
      j = {{"type", "difficulty"},
           {"n_actions", spec.n_actions},
           {"n_labels", spec.n_labels},
           {"success_fraction", spec.success_fraction}};
      break;
    case EnvironmentType::kFile:
      return {{"type", "file"}, {"path", spec.path.string()}};
  }
  if (spec.seed) j["seed"] = *spec.seed;
  return j;
}

std::vector<std::uint64_t> parse_seeds_value(const json& v) {
  const std::string where = "config";
  if (v.is_string()) return parse_seed_list(v.get<std::string>());
  if (!v.is_array() || v.empty()) fail(where, "'seeds' must be a non-empty array or a range");
  std::vector<std::uint64_t> out;
  for (const auto& s : v) out.push_back(as_seed(s, "seeds", where));
  return out;
}

const std::set<std::string> kTopLevelKeys = {
    "format",        "k",           "steps",          "learning_rate",       "environment",
    "estimator",     "aggregator",  "variants",       "batch_prompts",       "eval_every",
    "eval_ks",       "seed",        "seeds",          "ppo_epochs",          "value_learning_rate",
    "eval_mode",     "eval_samples", "majority_mc_samples", "majority_fallback", "max_tuples"};

RunConfig parse_config_json(const json& j) {
  const std::string where = "config";
  if (!j.is_object()) fail(where, "top level must be an object");
  reject_unknown(j, kTopLevelKeys, where);
  if (j.contains("format") && j.at("format") != kConfigFormat) {
    fail(where, "unsupported format " + j.at("format").dump());
  }

  RunConfig c;
  TrainConfig& t = c.train;
  t.k = as_count(require(j, "k", where), "k", where);
  t.steps = as_count(require(j, "steps", where), "steps", where);
  t.learning_rate = as_real(require(j, "learning_rate", where), "learning_rate", where);
  c.environment = parse_environment(require(j, "environment", where));

  if (j.contains("batch_prompts")) {
    c.batch_prompts = as_count(j["batch_prompts"], "batch_prompts", where);
  }
  if (j.contains("eval_every")) t.eval_every = as_count(j["eval_every"], "eval_every", where);
  if (j.contains("eval_ks")) {
    const json& ks = j["eval_ks"];
    if (!ks.is_array() || ks.empty()) fail(where, "'eval_ks' must be a non-empty array");
    t.eval_ks.clear();
    for (const auto& x : ks) t.eval_ks.push_back(as_count(x, "eval_ks", where));
    std::sort(t.eval_ks.begin(), t.eval_ks.end());
    t.eval_ks.erase(std::unique(t.eval_ks.begin(), t.eval_ks.end()), t.eval_ks.end());
  }
  if (j.contains("seed")) t.seed = as_seed(j["seed"], "seed", where);
  if (j.contains("ppo_epochs")) t.ppo_epochs = as_count(j["ppo_epochs"], "ppo_epochs", where);
  if (j.contains("value_learning_rate")) {
    t.value_learning_rate = as_real(j["value_learning_rate"], "value_learning_rate", where);
  }
  if (j.contains("eval_mode")) {
    const std::string mode = as_string(j["eval_mode"], "eval_mode", where);
    if (mode == "exact") {
      t.eval_mode = EvalMode::kExact;
    } else if (mode == "sampled") {
      t.eval_mode = EvalMode::kSampled;
    } else {
      fail(where, "'eval_mode' must be \"exact\" or \"sampled\"");
    }
  }
  if (j.contains("eval_samples")) t.eval_samples = as_count(j["eval_samples"], "eval_samples", where);
  if (j.contains("majority_mc_samples")) {
    t.majority_mc_samples = as_count(j["majority_mc_samples"], "majority_mc_samples", where);
  }
  if (j.contains("majority_fallback")) {
    t.monte_carlo_fallback = as_bool(j["majority_fallback"], "majority_fallback", where);
  }
  if (j.contains("max_tuples")) {
    t.budget.max_tuples = as_count(j["max_tuples"], "max_tuples", where);
  }
  if (j.contains("seeds")) c.seeds = parse_seeds_value(j["seeds"]);

  const bool single = j.contains("estimator") || j.contains("aggregator");
  if (single && j.contains("variants")) {
    fail(where, "give either 'estimator'/'aggregator' or 'variants', not both");
  }
  if (j.contains("variants")) {
    const json& vs = j["variants"];
    if (!vs.is_array() || vs.empty()) fail(where, "'variants' must be a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string vw = "config.variants[" + std::to_string(i) + "]";
      const json& v = vs[i];
      if (!v.is_object()) fail(vw, "must be an object");
      reject_unknown(v, {"name", "estimator", "aggregator", "k"}, vw);
      Variant var;
      var.estimator = parse_estimator(require(v, "estimator", vw), vw + ".estimator");
      var.aggregator = parse_aggregator(require(v, "aggregator", vw), vw + ".aggregator");
      if (v.contains("k")) var.k = as_count(v["k"], "k", vw);
      var.name = v.contains("name") ? as_string(v["name"], "name", vw)
                                    : slug(var.estimator.name()) + "-" + slug(var.aggregator.name());
      check_variant_name(var.name, vw);
      if (!names.insert(var.name).second) fail(vw, "duplicate variant name '" + var.name + "'");
      c.variants.push_back(var);
    }
  } else {
    Variant var;
    var.estimator = parse_estimator(require(j, "estimator", where), "config.estimator");
    var.aggregator = parse_aggregator(require(j, "aggregator", where), "config.aggregator");
    var.name = slug(var.estimator.name()) + "-" + slug(var.aggregator.name());
    c.variants.push_back(var);
  }

  for (const auto& var : c.variants) {
    try {
      train_config_for(c, var, 0).validate();
    } catch (const ArgumentError& e) {
      fail("config (variant " + var.name + ")", e.what());
    }
    if (var.aggregator.tag == AggregatorTag::kMajority &&
        c.environment.type == EnvironmentType::kGaussian) {
      fail("config (variant " + var.name + ")", "majority aggregator needs a labeled environment");
    }
  }
  return c;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c = parse_config(text);
  if (c.environment.type == EnvironmentType::kFile && c.environment.path.is_relative()) {
    c.environment.path = path.parent_path() / c.environment.path;
  }
  return c;
}

std::vector<std::string> preset_names() { return {"figure1", "labeled-mv", "ablate-k"}; }

std::string preset_json(std::string_view name) {
  if (name == "figure1") {
    return R"({
  "k": 4, "steps": 1000, "learning_rate": 1.0, "eval_every": 1, "eval_ks": [1, 4, 8],
  "environment": {"type": "gaussian", "n_actions": 100},
  "variants": [
    {"name": "mean-loo", "estimator": "loo", "aggregator": "mean"},
    {"name": "loo-max", "estimator": "loo", "aggregator": "max"},
    {"name": "demeaned-max", "estimator": "demeaned", "aggregator": "max"}
  ],
  "seeds": "0:20"
})";
  }
  if (name == "labeled-mv") {
    return R"({
  "k": 4, "steps": 500, "learning_rate": 1.0, "eval_every": 5, "eval_ks": [1, 4, 8],
  "environment": {"type": "labeled", "n_actions": 50, "n_labels": 5},
  "variants": [
    {"name": "mean-loo", "estimator": "loo", "aggregator": "mean"},
    {"name": "loo-majority", "estimator": "loo", "aggregator": "majority"},
    {"name": "demeaned-majority", "estimator": "demeaned", "aggregator": "majority"}
  ],
  "seeds": "0:10"
})";
  }
  if (name == "ablate-k") {
    return R"({
  "k": 4, "steps": 1000, "learning_rate": 1.0, "eval_every": 5, "eval_ks": [1, 2, 4, 8],
  "environment": {"type": "gaussian", "n_actions": 100},
  "variants": [
    {"name": "loo-max-k2", "estimator": "loo", "aggregator": "max", "k": 2},
    {"name": "loo-max-k4", "estimator": "loo", "aggregator": "max", "k": 4},
    {"name": "loo-max-k8", "estimator": "loo", "aggregator": "max", "k": 8}
  ],
  "seeds": "0:10"
})";
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

RunConfig preset_config(std::string_view name) {
  RunConfig c = parse_config(preset_json(name));
  c.preset = std::string(name);
  return c;
}

std::string config_to_json(const RunConfig& c) {
  const TrainConfig& t = c.train;
  json j;
  j["format"] = kConfigFormat;
  j["k"] = t.k;
  j["steps"] = t.steps;
  j["learning_rate"] = t.learning_rate;
  j["environment"] = environment_to_config_json(c.environment);
  if (c.batch_prompts) j["batch_prompts"] = *c.batch_prompts;
  j["eval_every"] = t.eval_every;
  j["eval_ks"] = t.eval_ks;
  j["seed"] = t.seed;
  j["ppo_epochs"] = t.ppo_epochs;
  if (t.value_learning_rate) j["value_learning_rate"] = *t.value_learning_rate;
  j["eval_mode"] = t.eval_mode == EvalMode::kExact ? "exact" : "sampled";
  j["eval_samples"] = t.eval_samples;
  j["majority_mc_samples"] = t.majority_mc_samples;
  j["majority_fallback"] = t.monte_carlo_fallback;
  j["max_tuples"] = t.budget.max_tuples;
  if (!c.seeds.empty()) j["seeds"] = c.seeds;
  json vs = json::array();
  for (const auto& v : c.variants) {
    json vj{{"name", v.name},
            {"estimator", json::parse(estimator_to_json(v.estimator))},
            {"aggregator", json::parse(aggregator_to_json(v.aggregator))}};
    if (v.k) vj["k"] = *v.k;
    vs.push_back(vj);
  }
  j["variants"] = vs;
  return j.dump(2);
}

TrainConfig train_config_for(const RunConfig& config, const Variant& variant,
                             std::uint64_t seed, std::size_t n_prompts) {
  TrainConfig t = config.train;
  t.batch_prompts = config.batch_prompts.value_or(n_prompts > 1 ? kMultiPromptBatch : 1);
  t.estimator = variant.estimator;
  t.aggregator = variant.aggregator;
  if (variant.k) t.k = *variant.k;
  t.seed = seed;
  return t;
}

Environment build_environment(const EnvironmentSpec& spec, std::uint64_t run_seed) {
  const std::uint64_t seed = spec.seed.value_or(run_seed);
  switch (spec.type) {
    case EnvironmentType::kGaussian:
      return build_gaussian_bandit(spec.n_actions, seed);
    case EnvironmentType::kLabeled:
      return build_labeled_bandit(spec.n_actions, spec.n_labels, seed);
    case EnvironmentType::kDifficulty:
      return build_difficulty_env(spec.success_fraction, spec.n_actions, spec.n_labels, seed);
    case EnvironmentType::kFile:
      try {
        return environment_from_json(read_text_file(spec.path));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config.environment: ") + e.what());
      }
  }
  throw ConfigError("config.environment: unsupported type");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("seeds: '" + std::string(s) + "' is not a non-negative integer");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const std::size_t colon = item.find(':');
      if (colon == std::string_view::npos) {
        out.push_back(number(item));
      } else {
        const std::uint64_t lo = number(item.substr(0, colon));
        const std::uint64_t hi = number(item.substr(colon + 1));
        if (hi <= lo) throw ConfigError("seeds: empty range '" + std::string(item) + "'");
        for (std::uint64_t s = lo; s < hi; ++s) out.push_back(s);
      }
    }
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("seeds: the seed list is empty");
  std::vector<std::uint64_t> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("seeds: duplicate seed in list");
  }
  return out;
}

}  // namespace ksample::cli
