#ifndef KSAMPLE_CLI_COMMANDS_HPP_
#define KSAMPLE_CLI_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ksample/identity_suite.hpp"

namespace ksample::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verify found a violation, or an I/O error
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBudget = 3;

// When set, this variable replaces any --out value.
inline constexpr const char* kOutDirEnv = "KSAMPLE_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "ksample-out";
inline constexpr const char* kManifestFile = "manifest.json";

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> seeds;
};

std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag);

// Each command reports progress on `out`, diagnostics on `err`, and returns
// its exit code; exceptions do not escape.
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);
int sweep_command(const CommandOptions& options, std::ostream& out, std::ostream& err);
int verify_command(const std::optional<std::filesystem::path>& out_dir,
                   const IdentityOptions& identities, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace ksample::cli

#endif  // KSAMPLE_CLI_COMMANDS_HPP_
