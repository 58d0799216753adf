#ifndef KSAMPLE_SERIALIZATION_HPP_
#define KSAMPLE_SERIALIZATION_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "ksample/aggregators.hpp"
#include "ksample/environment.hpp"
#include "ksample/estimators.hpp"
#include "ksample/policy.hpp"

namespace ksample {

// Environment file schema (JSON):
//   {"format": "ksample-environment/1", "n_prompts": P, "n_actions": A,
//    "rewards": [[...A reals...] x P],
//    "n_labels": L, "labels": [[...A ints...] x P], "target_labels": [...P ints...]}
// The three label keys are present together or not at all. Doubles are
// written in shortest round-trip form.
std::string environment_to_json(const Environment& env);
Environment environment_from_json(std::string_view text);

// {"format": "ksample-params/1", "n_prompts": P, "n_actions": A, "logits": [[...]]}
std::string params_to_json(const PolicyParams& params);
PolicyParams params_from_json(std::string_view text);

// Compact descriptions used in manifests and replay files, e.g.
// {"tag": "softmax", "beta": 2.0} and {"tag": "leave_p_out", "p": 2}.
std::string aggregator_to_json(const AggregatorKind& kind);
AggregatorKind aggregator_from_json(std::string_view text);
std::string estimator_to_json(const EstimatorKind& kind);
EstimatorKind estimator_from_json(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ksample

#endif  // KSAMPLE_SERIALIZATION_HPP_
