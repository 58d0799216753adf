#include "ksample_cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <ostream>

#include "json.hpp"
#include "ksample/errors.hpp"
#include "ksample/serialization.hpp"
#include "ksample_cli/config.hpp"
#include "ksample_cli/csv.hpp"

#ifndef KSAMPLE_VERSION
#define KSAMPLE_VERSION "unknown"
#endif

namespace ksample::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunConfig resolve_config(const CommandOptions& o) {
  if (o.config && o.preset) throw ConfigError("give either --config or --preset, not both");
  if (o.config) return load_config(*o.config);
  if (o.preset) return preset_config(*o.preset);
  throw ConfigError("one of --config or --preset is required");
}

// Trains every variant for every seed, writing per-run files under `root`.
json train_all(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
               const fs::path& root, bool summarise, std::ostream& out) {
  json runs = json::array();
  json summaries = json::array();
  std::vector<std::vector<MetricsLog>> logs(config.variants.size());
  for (std::uint64_t seed : seeds) {
    const Environment env = build_environment(config.environment, seed);
    const fs::path env_file = root / ("environment-" + std::to_string(seed) + ".json");
    write_text_file(env_file, environment_to_json(env));
    const PolicyParams init = PolicyParams::uniform(env.n_prompts(), env.n_actions());
    for (std::size_t v = 0; v < config.variants.size(); ++v) {
      const Variant& var = config.variants[v];
      const TrainConfig tc = train_config_for(config, var, seed, env.n_prompts());
      TrainResult result = train(tc, env, init);
      const fs::path dir = root / var.name / std::to_string(seed);
      const CsvRunInfo info{var.estimator.name(), var.aggregator.name(), tc.k};
      write_text_file(dir / "metrics.csv", metrics_csv(result.log, info, seed, tc.eval_ks));
      write_text_file(dir / "params.json", params_to_json(result.params));
      bool estimated = false;
      for (const auto& rec : result.log) estimated = estimated || rec.majority_estimated;
      runs.push_back({{"variant", var.name},
                      {"seed", seed},
                      {"k", tc.k},
                      {"batch_prompts", tc.batch_prompts},
                      {"metrics", fs::relative(dir / "metrics.csv", root).string()},
                      {"params", fs::relative(dir / "params.json", root).string()},
                      {"environment", fs::relative(env_file, root).string()},
                      {"majority_monte_carlo", estimated}});
      out << var.name << " seed " << seed << ": final mean_reward "
          << format_double(result.log.back().mean_reward) << "\n";
      if (summarise) logs[v].push_back(std::move(result.log));
    }
  }
  if (summarise) {
    for (std::size_t v = 0; v < config.variants.size(); ++v) {
      const Variant& var = config.variants[v];
      const TrainConfig tc = train_config_for(config, var, 0);
      const CsvRunInfo info{var.estimator.name(), var.aggregator.name(), tc.k};
      const fs::path file = root / var.name / "summary.csv";
      write_text_file(file, summary_csv(logs[v], info, tc.eval_ks));
      summaries.push_back({{"variant", var.name}, {"summary", fs::relative(file, root).string()}});
    }
  }
  return {{"runs", runs}, {"summaries", summaries}};
}

int execute(const std::string& command, const CommandOptions& o, std::ostream& out,
            std::ostream& err) {
  try {
    const RunConfig config = resolve_config(o);
    std::vector<std::uint64_t> seeds;
    if (command == "run") {
      seeds = {config.train.seed};
      if (o.seeds) {
        seeds = parse_seed_list(*o.seeds);
        if (seeds.size() != 1) throw ConfigError("run takes exactly one seed; use sweep");
      }
    } else if (o.seeds) {
      seeds = parse_seed_list(*o.seeds);
    } else if (!config.seeds.empty()) {
      seeds = config.seeds;
    } else {
      throw ConfigError("sweep needs seeds: pass --seeds or set 'seeds' in the config");
    }

    const fs::path root = resolve_out_dir(o.out);
    const std::string started = utc_timestamp();
    json manifest;
    manifest["format"] = "ksample-manifest/1";
    manifest["command"] = command;
    manifest["code_version"] = version_string();
    if (!config.preset.empty()) manifest["preset"] = config.preset;
    manifest["config"] = json::parse(config_to_json(config));
    manifest["seeds"] = seeds;
    manifest["initial_policy"] = "uniform";
    manifest["metrics_schema"] = kMetricsSchema;
    manifest["started_at"] = started;
    const json produced = train_all(config, seeds, root, command == "sweep", out);
    manifest["runs"] = produced["runs"];
    if (command == "sweep") manifest["summaries"] = produced["summaries"];
    manifest["finished_at"] = utc_timestamp();
    write_text_file(root / kManifestFile, manifest.dump(2));
    out << "wrote " << (root / kManifestFile).string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResourceError& e) {
    err << "error: budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

std::string version_string() { return std::string("ksample ") + KSAMPLE_VERSION; }

fs::path resolve_out_dir(const std::optional<fs::path>& flag) {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return flag.value_or(fs::path(kDefaultOutDir));
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return execute("run", options, out, err);
}

int sweep_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return execute("sweep", options, out, err);
}

int verify_command(const std::optional<fs::path>& out_dir, const IdentityOptions& identities,
                   std::ostream& out, std::ostream& err) {
  try {
    const fs::path root = resolve_out_dir(out_dir);
    const auto results = run_identity_suite(identities);
    const std::string report = format_report(results);
    out << report;

    json summary;
    summary["format"] = "ksample-verify/1";
    summary["code_version"] = version_string();
    summary["seed"] = identities.seed;
    summary["identities"] = json::array();
    bool all = true;
    for (const auto& r : results) {
      all = all && r.passed;
      json measurements = json::array();
      for (const auto& m : r.measurements) {
        measurements.push_back({{"name", m.name},
                                {"observed", m.observed},
                                {"threshold", m.threshold},
                                {"higher_is_better", m.higher_is_better},
                                {"ok", m.ok()}});
      }
      json entry{{"id", r.id},
                 {"passed", r.passed},
                 {"cases", r.cases},
                 {"seconds", r.seconds},
                 {"measurements", measurements},
                 {"detail", r.detail}};
      if (!r.passed && r.failing_instance) {
        const fs::path file = root / "failing" / (r.id + ".json");
        write_text_file(file, *r.failing_instance);
        entry["failing_instance"] = fs::relative(file, root).string();
        err << "identity " << r.id << " failed; replay record: " << file.string() << "\n";
      }
      summary["identities"].push_back(entry);
    }
    summary["passed"] = all;
    write_text_file(root / "verify_report.txt", report);
    write_text_file(root / "verify_report.json", summary.dump(2));
    return all ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ksample::cli
