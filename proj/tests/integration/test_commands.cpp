#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "json.hpp"
#include "ksample/ksample.hpp"
#include "ksample_cli/commands.hpp"
#include "ksample_cli/config.hpp"
#include "ksample_cli/csv.hpp"
#include "temp_dir.hpp"

namespace ksample::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

const char* kSmall = R"({
  "k": 4, "steps": 30, "learning_rate": 1.0, "eval_every": 5, "eval_ks": [1, 4],
  "environment": {"type": "gaussian", "n_actions": 12},
  "variants": [
    {"name": "mean-loo", "estimator": "loo", "aggregator": "mean"},
    {"name": "loo-max", "estimator": "loo", "aggregator": "max"}
  ]
})";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_in_process(const std::string& cmd, CommandOptions o) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cmd == "run" ? run_command(o, out, err) : sweep_command(o, out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary through the shell and returns its exit status.
int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(KSAMPLE_CLI_PATH) + " " + args + " > '" + log.string() +
                          "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(RunCommand, WritesMetricsParamsEnvironmentAndManifest) {
  TempDir dir("run");
  write_text_file(dir / "c.json", kSmall);
  const auto r = run_in_process("run", {dir / "c.json", {}, dir / "out", {}});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const std::string v : {"mean-loo", "loo-max"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / v / "0" / "metrics.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / v / "0" / "params.json"));
  }
  const json m = json::parse(read_text_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(m["command"], "run");
  EXPECT_EQ(m["seeds"], json::array({0}));
  EXPECT_EQ(m["initial_policy"], "uniform");
  EXPECT_EQ(m["runs"].size(), 2u);
  EXPECT_TRUE(m.contains("code_version"));
  EXPECT_TRUE(m.contains("started_at"));
  EXPECT_TRUE(m.contains("finished_at"));
  const auto env = environment_from_json(
      read_text_file(dir / "out" / m["runs"][0]["environment"].get<std::string>()));
  EXPECT_EQ(env, build_gaussian_bandit(12, 0));
}

TEST(RunCommand, SameConfigGivesByteIdenticalCsv) {
  TempDir dir("det");
  write_text_file(dir / "c.json", kSmall);
  ASSERT_EQ(run_in_process("run", {dir / "c.json", {}, dir / "a", {}}).code, kExitOk);
  ASSERT_EQ(run_in_process("run", {dir / "c.json", {}, dir / "b", {}}).code, kExitOk);
  for (const std::string v : {"mean-loo", "loo-max"}) {
    EXPECT_EQ(read_text_file(dir / "a" / v / "0" / "metrics.csv"),
              read_text_file(dir / "b" / v / "0" / "metrics.csv"));
  }
}

TEST(RunCommand, ManifestConfigReproducesTheRun) {
  TempDir dir("repro");
  write_text_file(dir / "c.json", kSmall);
  ASSERT_EQ(run_in_process("run", {dir / "c.json", {}, dir / "a", {}}).code, kExitOk);
  const json m = json::parse(read_text_file(dir / "a" / "manifest.json"));
  write_text_file(dir / "again.json", m["config"].dump());
  ASSERT_EQ(run_in_process("run", {dir / "again.json", {}, dir / "b", {}}).code, kExitOk);
  EXPECT_EQ(read_text_file(dir / "a" / "loo-max" / "0" / "metrics.csv"),
            read_text_file(dir / "b" / "loo-max" / "0" / "metrics.csv"));
  EXPECT_EQ(read_text_file(dir / "a" / "loo-max" / "0" / "params.json"),
            read_text_file(dir / "b" / "loo-max" / "0" / "params.json"));
}

TEST(RunCommand, Figure1PresetEmitsOneCsvPerEstimator) {
  TempDir dir("fig1");
  const auto r = run_in_process("run", {{}, "figure1", dir / "out", {}});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::size_t csvs = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
    csvs += e.path().filename() == "metrics.csv" ? 1 : 0;
  }
  EXPECT_EQ(csvs, 3u);
  const auto t = parse_csv(read_text_file(dir / "out" / "demeaned-max" / "0" / "metrics.csv"));
  EXPECT_EQ(t.rows.size(), 1001u);
  EXPECT_EQ(t.rows[0][t.column("estimator")], "demeaned");
  EXPECT_EQ(t.rows[0][t.column("aggregator")], "max");
}

TEST(RunCommand, ConfigProblemsExitTwo) {
  TempDir dir("bad");
  write_text_file(dir / "c.json", R"({"steps": 3, "learning_rate": 1.0,
      "environment": {"type": "gaussian", "n_actions": 4}, "estimator": "loo",
      "aggregator": "max"})");
  auto r = run_in_process("run", {dir / "c.json", {}, dir / "out", {}});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("'k'"), std::string::npos) << r.err;
  EXPECT_EQ(run_in_process("run", {dir / "missing.json", {}, dir / "out", {}}).code, kExitConfig);
  EXPECT_EQ(run_in_process("run", {{}, {}, dir / "out", {}}).code, kExitConfig);
  EXPECT_EQ(run_in_process("run", {dir / "c.json", "figure1", dir / "out", {}}).code,
            kExitConfig);
  EXPECT_EQ(run_in_process("run", {{}, "figure1", dir / "out", "0,1"}).code, kExitConfig);
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(RunCommand, BudgetProblemsExitThree) {
  TempDir dir("budget");
  write_text_file(dir / "c.json", R"({"k": 2, "steps": 2, "learning_rate": 1.0,
      "eval_ks": [12], "majority_fallback": false, "max_tuples": 1000,
      "environment": {"type": "labeled", "n_actions": 30, "n_labels": 12},
      "estimator": "loo", "aggregator": "majority"})");
  const auto r = run_in_process("run", {dir / "c.json", {}, dir / "out", {}});
  EXPECT_EQ(r.code, kExitBudget);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST(RunCommand, EnvironmentVariableOverridesOutDir) {
  TempDir dir("envvar");
  write_text_file(dir / "c.json", kSmall);
  {
    ScopedEnv env(kOutDirEnv, (dir / "from_env").string());
    ASSERT_EQ(run_in_process("run", {dir / "c.json", {}, dir / "from_flag", {}}).code, kExitOk);
  }
  EXPECT_TRUE(fs::exists(dir / "from_env" / "manifest.json"));
  EXPECT_FALSE(fs::exists(dir / "from_flag"));
}

TEST(SweepCommand, TwentySeedsGiveTwentyCsvsAndAMatchingSummary) {
  TempDir dir("sweep");
  write_text_file(dir / "c.json", kSmall);
  const auto r = run_in_process("sweep", {dir / "c.json", {}, dir / "out", "0:20"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const std::string v : {"mean-loo", "loo-max"}) {
    std::vector<CsvTable> seeds;
    for (int s = 0; s < 20; ++s) {
      const fs::path f = dir / "out" / v / std::to_string(s) / "metrics.csv";
      ASSERT_TRUE(fs::exists(f));
      seeds.push_back(parse_csv(read_text_file(f)));
    }
    const auto summary = parse_csv(read_text_file(dir / "out" / v / "summary.csv"));
    ASSERT_EQ(summary.rows.size(), seeds[0].rows.size());
    for (const std::string col : {"mean_reward", "kl", "pass_at_1", "pass_at_4"}) {
      for (std::size_t row = 0; row < summary.rows.size(); ++row) {
        double sum = 0.0;
        for (const auto& t : seeds) sum += std::stod(t.rows[row][t.column(col)]);
        const double mean = std::stod(summary.rows[row][summary.column(col + "_mean")]);
        EXPECT_NEAR(mean, sum / 20.0, 1e-12) << v << " " << col << " row " << row;
      }
    }
  }
  const json m = json::parse(read_text_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(m["seeds"].size(), 20u);
  EXPECT_EQ(m["summaries"].size(), 2u);
}

TEST(SweepCommand, SeedsComeFromConfigWhenFlagAbsent) {
  TempDir dir("sweepcfg");
  json c = json::parse(kSmall);
  c["seeds"] = {4, 9};
  write_text_file(dir / "c.json", c.dump());
  ASSERT_EQ(run_in_process("sweep", {dir / "c.json", {}, dir / "out", {}}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "out" / "loo-max" / "9" / "metrics.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "loo-max" / "0"));
}

TEST(SweepCommand, EmptySeedListExitsTwo) {
  TempDir dir("noseeds");
  write_text_file(dir / "c.json", kSmall);
  EXPECT_EQ(run_in_process("sweep", {dir / "c.json", {}, dir / "out", ""}).code, kExitConfig);
  EXPECT_EQ(run_in_process("sweep", {dir / "c.json", {}, dir / "out", {}}).code, kExitConfig);
}

IdentityOptions quick_identities() {
  IdentityOptions o;
  o.exact_instances = 10;
  o.sparse_batches = 200;
  o.variance_instances = 4;
  o.variance_draws = 10'000;
  o.leave_p_out_batches = 20;
  o.leave_p_out_instances = 6;
  o.finite_difference_instances = 6;
  o.majority_batches = 200;
  o.reduction_batches = 50;
  return o;
}

TEST(VerifyCommand, PassesAndWritesReports) {
  TempDir dir("verify");
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(verify_command(dir / "out", quick_identities(), out, err), kExitOk) << out.str();
  const json report = json::parse(read_text_file(dir / "out" / "verify_report.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_EQ(report["identities"].size(), 8u);
  for (const auto& id : report["identities"]) {
    EXPECT_FALSE(id["measurements"].empty()) << id["id"];
  }
  EXPECT_TRUE(fs::exists(dir / "out" / "verify_report.txt"));
}

TEST(VerifyCommand, InjectedSignFlipInDemeanedExitsOneWithReplayFile) {
  TempDir dir("mutant");
  IdentityOptions o = quick_identities();
  o.estimators.demeaned = [](const AggregatorKind& kind, const SampleBatch& b,
                             const PolicyParams& params) {
    return estimate_demeaned(kind, b, params) * -1.0;
  };
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(verify_command(dir / "out", o, out, err), kExitFailure);
  EXPECT_TRUE(fs::exists(dir / "out" / "failing" / "bias_identity.json"));
  const json replay = json::parse(read_text_file(dir / "out" / "failing" / "bias_identity.json"));
  const auto env = environment_from_json(replay["environment"].dump());
  EXPECT_GE(env.n_actions(), 2u);
}

TEST(Binary, ExitCodesThroughTheShell) {
  TempDir dir("bin");
  write_text_file(dir / "c.json", kSmall);
  write_text_file(dir / "nok.json", R"({"steps": 3, "learning_rate": 1.0,
      "environment": {"type": "gaussian", "n_actions": 4}, "estimator": "loo",
      "aggregator": "max"})");
  const fs::path log = dir / "log.txt";
  EXPECT_EQ(run_binary("run --config '" + (dir / "c.json").string() + "' --out '" +
                           (dir / "o").string() + "'",
                       log),
            0);
  EXPECT_EQ(run_binary("run --config '" + (dir / "nok.json").string() + "' --out '" +
                           (dir / "o2").string() + "'",
                       log),
            2);
  EXPECT_NE(read_text_file(log).find("'k'"), std::string::npos);
  EXPECT_EQ(run_binary("sweep --preset figure1 --seeds '' --out '" + (dir / "o3").string() + "'",
                       log),
            2);
  EXPECT_EQ(run_binary("frobnicate", log), 2);
  EXPECT_EQ(run_binary("--help", log), 0);
  EXPECT_NE(read_text_file(log).find("verify"), std::string::npos);
}

}  // namespace
}  // namespace ksample::cli
