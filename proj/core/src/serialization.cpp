#include "ksample/serialization.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ksample/errors.hpp"

namespace ksample {

using nlohmann::json;

namespace {

constexpr const char* kEnvFormat = "ksample-environment/1";
constexpr const char* kParamsFormat = "ksample-params/1";

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) {
    throw ArgumentError(std::string(what) + ": missing key '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string(what) + ": bad value for '" + key + "': " + e.what());
  }
}

json matrix_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

DenseMatrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                             const char* what) {
  auto data = j.get<std::vector<std::vector<double>>>();
  if (data.size() != rows) throw ArgumentError(std::string(what) + ": row count mismatch");
  std::vector<double> flat;
  flat.reserve(rows * cols);
  for (const auto& row : data) {
    if (row.size() != cols) {
      throw ArgumentError(std::string(what) + ": column count mismatch");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return DenseMatrix(rows, cols, std::move(flat));
}

}  // namespace

std::string environment_to_json(const Environment& env) {
  json j;
  j["format"] = kEnvFormat;
  j["n_prompts"] = env.n_prompts();
  j["n_actions"] = env.n_actions();
  j["rewards"] = matrix_to_json(env.rewards());
  if (env.labels()) {
    j["n_labels"] = env.labels()->n_labels;
    j["labels"] = env.labels()->label;
    j["target_labels"] = env.labels()->target;
  }
  return j.dump(1);
}

Environment environment_from_json(std::string_view text) {
  const json j = parse(text, "environment");
  if (j.contains("format") && j["format"] != kEnvFormat) {
    throw ArgumentError("environment: unsupported format " + j["format"].dump());
  }
  const auto n_prompts = get_field<std::size_t>(j, "n_prompts", "environment");
  const auto n_actions = get_field<std::size_t>(j, "n_actions", "environment");
  if (!j.contains("rewards")) throw ArgumentError("environment: missing key 'rewards'");
  DenseMatrix rewards;
  try {
    rewards = matrix_from_json(j["rewards"], n_prompts, n_actions, "environment rewards");
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("environment: bad rewards: ") + e.what());
  }
  const int label_keys = static_cast<int>(j.contains("labels")) +
                         static_cast<int>(j.contains("target_labels")) +
                         static_cast<int>(j.contains("n_labels"));
  if (label_keys == 0) return Environment(std::move(rewards));
  if (label_keys != 3) {
    throw ArgumentError("environment: labels, target_labels and n_labels go together");
  }
  Environment::Labels labels;
  labels.n_labels = get_field<std::size_t>(j, "n_labels", "environment");
  labels.label = get_field<std::vector<std::vector<LabelId>>>(j, "labels", "environment");
  labels.target = get_field<std::vector<LabelId>>(j, "target_labels", "environment");
  return Environment(std::move(rewards), std::move(labels));
}

std::string params_to_json(const PolicyParams& params) {
  json j;
  j["format"] = kParamsFormat;
  j["n_prompts"] = params.n_prompts();
  j["n_actions"] = params.n_actions();
  j["logits"] = matrix_to_json(params.logits());
  return j.dump(1);
}

PolicyParams params_from_json(std::string_view text) {
  const json j = parse(text, "params");
  const auto n_prompts = get_field<std::size_t>(j, "n_prompts", "params");
  const auto n_actions = get_field<std::size_t>(j, "n_actions", "params");
  if (!j.contains("logits")) throw ArgumentError("params: missing key 'logits'");
  try {
    return PolicyParams::from_logits(
        matrix_from_json(j["logits"], n_prompts, n_actions, "params logits"));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("params: bad logits: ") + e.what());
  }
}

std::string aggregator_to_json(const AggregatorKind& kind) {
  json j;
  switch (kind.tag) {
    case AggregatorTag::kMean:
      j["tag"] = "mean";
      break;
    case AggregatorTag::kMax:
      j["tag"] = "max";
      break;
    case AggregatorTag::kMajority:
      j["tag"] = "majority";
      j["tie_rule"] = kind.tie_rule == TieRule::kExpected ? "expected" : "sampled";
      if (kind.tie_rule == TieRule::kSampled) j["tie_seed"] = kind.tie_seed;
      break;
    case AggregatorTag::kSoftmax:
      j["tag"] = "softmax";
      j["beta"] = kind.beta;
      break;
  }
  return j.dump();
}

AggregatorKind aggregator_from_json(std::string_view text) {
  const json j = parse(text, "aggregator");
  const auto tag = get_field<std::string>(j, "tag", "aggregator");
  if (tag == "mean") return AggregatorKind::mean();
  if (tag == "max") return AggregatorKind::max();
  if (tag == "softmax") return AggregatorKind::softmax(get_field<double>(j, "beta", "aggregator"));
  if (tag == "majority") {
    const std::string rule = j.value("tie_rule", std::string("expected"));
    if (rule == "expected") return AggregatorKind::majority();
    if (rule == "sampled") {
      return AggregatorKind::majority(TieRule::kSampled, j.value("tie_seed", std::uint64_t{0}));
    }
    throw ArgumentError("aggregator: unknown tie_rule '" + rule + "'");
  }
  throw ArgumentError("aggregator: unknown tag '" + tag + "'");
}

namespace {

EffectiveReward variant_from_string(const std::string& s) {
  if (s == "mean") return EffectiveReward::kMean;
  if (s == "pass_k") return EffectiveReward::kPassK;
  if (s == "biased_pass_k") return EffectiveReward::kBiasedPassK;
  throw ArgumentError("estimator: unknown variant '" + s + "'");
}

}  // namespace

std::string estimator_to_json(const EstimatorKind& kind) {
  json j;
  switch (kind.tag) {
    case EstimatorTag::kNaive:
      j["tag"] = "naive";
      break;
    case EstimatorTag::kLoo:
      j["tag"] = "loo";
      break;
    case EstimatorTag::kDemeaned:
      j["tag"] = "demeaned";
      break;
    case EstimatorTag::kLeavePOut:
      j["tag"] = "leave_p_out";
      j["p"] = kind.p;
      break;
    case EstimatorTag::kPpo:
      j["tag"] = "ppo";
      j["variant"] = to_string(kind.variant);
      j["epsilon"] = kind.epsilon;
      j["alpha"] = kind.alpha;
      break;
    case EstimatorTag::kGrpo:
      j["tag"] = "grpo";
      j["variant"] = to_string(kind.variant);
      j["epsilon"] = kind.epsilon;
      j["normalize_std"] = kind.normalize_std;
      break;
  }
  return j.dump();
}

EstimatorKind estimator_from_json(std::string_view text) {
  const json j = parse(text, "estimator");
  const auto tag = get_field<std::string>(j, "tag", "estimator");
  if (tag == "naive") return EstimatorKind::naive();
  if (tag == "loo") return EstimatorKind::loo();
  if (tag == "demeaned") return EstimatorKind::demeaned();
  if (tag == "leave_p_out") {
    return EstimatorKind::leave_p_out(get_field<std::size_t>(j, "p", "estimator"));
  }
  if (tag == "ppo") {
    return EstimatorKind::ppo(variant_from_string(get_field<std::string>(j, "variant", "estimator")),
                              j.value("epsilon", 0.2), j.value("alpha", 0.2));
  }
  if (tag == "grpo") {
    return EstimatorKind::grpo(variant_from_string(get_field<std::string>(j, "variant", "estimator")),
                               j.value("normalize_std", false), j.value("epsilon", 0.2));
  }
  throw ArgumentError("estimator: unknown tag '" + tag + "'");
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ksample
