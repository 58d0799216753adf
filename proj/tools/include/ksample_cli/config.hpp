#ifndef KSAMPLE_CLI_CONFIG_HPP_
#define KSAMPLE_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ksample/environment.hpp"
#include "ksample/trainer.hpp"

namespace ksample::cli {

// Malformed or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvironmentType { kGaussian, kLabeled, kDifficulty, kFile };

struct EnvironmentSpec {
  EnvironmentType type = EnvironmentType::kGaussian;
  std::size_t n_actions = 0;
  std::size_t n_labels = 0;
  std::vector<double> success_fraction;
  std::filesystem::path path;
  // Fixed environment seed; when absent the run seed is used, so every seed
  // of a sweep draws its own reward table.
  std::optional<std::uint64_t> seed;
};

struct Variant {
  std::string name;  // output directory name
  EstimatorKind estimator;
  AggregatorKind aggregator;
  std::optional<std::size_t> k;  // overrides the shared k
};

struct RunConfig {
  // Shared training settings; estimator, aggregator and seed are filled in
  // per variant and per seed.
  TrainConfig train;
  EnvironmentSpec environment;
  std::vector<Variant> variants;
  // Unset: 1 for single-prompt environments, 64 otherwise.
  std::optional<std::size_t> batch_prompts;
  std::vector<std::uint64_t> seeds;  // used by sweep when --seeds is absent
  std::string preset;                // empty unless built from a preset
};

// Parses and validates a JSON config. Unknown keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
RunConfig preset_config(std::string_view name);
std::string preset_json(std::string_view name);

// Canonical JSON with every default spelled out; parse_config accepts it.
std::string config_to_json(const RunConfig& config);

inline constexpr std::size_t kMultiPromptBatch = 64;

// TrainConfig for one variant and seed on an environment with n_prompts prompts.
TrainConfig train_config_for(const RunConfig& config, const Variant& variant,
                             std::uint64_t seed, std::size_t n_prompts = 1);

Environment build_environment(const EnvironmentSpec& spec, std::uint64_t run_seed);

// "0,1,5" and half-open ranges "0:20" (mixable: "0:3,7"). Empty or malformed
// input throws ConfigError.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace ksample::cli

#endif  // KSAMPLE_CLI_CONFIG_HPP_
