#pragma once

#include "drgbt/config.hpp"
#include "drgbt/output.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace drgbt::commands {

enum ExitCode : int { kGoal = 0, kConfigError = 1, kCollision = 2, kTimeout = 3 };

/// Command-line overrides applied on top of the config file (and of the
/// DRGBT_SEED / DRGBT_OUT environment variables).
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> budget_mode;
  std::optional<bool> safe;
  std::optional<int> threads;
  bool use_env{true};
};

/// Loads `path` (or a preset when `path` names one) and applies the overrides.
/// Throws ConfigError.
config::AppConfig resolve_config(const std::string& path, const Overrides& ov);

int cmd_run(const config::AppConfig& cfg, std::ostream& log);
int cmd_trial(const config::AppConfig& cfg, std::ostream& log);
int cmd_deb_slice(const config::AppConfig& cfg, std::ostream& log);
/// Validates every known output file in `dir` (or the single file `path`).
int cmd_validate(const std::string& path, std::ostream& log);

/// Slice rows for every configured root, with the time of a point taken as
/// the fastest joint-limited reach time from the root.
std::vector<output::SliceRow> deb_slice_rows(const config::AppConfig& cfg);

}  // namespace drgbt::commands
