#include <iostream>

#include "CLI11.hpp"
#include "ksample_cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = ksample::cli;
  CLI::App app{"k-sample policy-gradient experiments on synthetic bandits"};
  app.set_version_flag("--version", cli::version_string());
  app.require_subcommand(1);

  cli::CommandOptions run_opts;
  cli::CommandOptions sweep_opts;
  std::optional<std::filesystem::path> verify_out;

  auto add_common = [](CLI::App* sub, cli::CommandOptions& o) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--preset", o.preset, "built-in configuration: figure1, labeled-mv, ablate-k");
    sub->add_option("--out", o.out,
                    std::string("output directory (overridden by $") + cli::kOutDirEnv + ")");
    sub->add_option("--seeds", o.seeds, "seed list, e.g. 0,1,2 or 0:20");
  };
  CLI::App* run = app.add_subcommand("run", "train every configured variant for one seed");
  add_common(run, run_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "train over a list of seeds and summarise");
  add_common(sweep, sweep_opts);
  CLI::App* verify = app.add_subcommand("verify", "run the oracle identity suite");
  verify->add_option("--out", verify_out,
                     std::string("report directory (overridden by $") + cli::kOutDirEnv + ")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitConfig;
  }

  if (run->parsed()) return cli::run_command(run_opts, std::cout, std::cerr);
  if (sweep->parsed()) return cli::sweep_command(sweep_opts, std::cout, std::cerr);
  return cli::verify_command(verify_out, {}, std::cout, std::cerr);
}
