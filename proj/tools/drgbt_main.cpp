#include "drgbt/commands.hpp"
#include "drgbt/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using drgbt::commands::Overrides;

void add_common(CLI::App* cmd, std::string& config, Overrides& ov, std::string& safe) {
  cmd->add_option("--config", config, "Config file or preset name (planar, xarm6, xarm6_large)")->required();
  cmd->add_option("--seed", ov.seed, "Base seed");
  cmd->add_option("--out", ov.out, "Output directory");
  cmd->add_option("--budget-mode", ov.budget_mode, "Budget enforcement")->check(CLI::IsMember({"wall", "virtual"}));
  cmd->add_option("--safe", safe, "Safe mode")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", ov.threads, "Worker threads for trials")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time motion planning among moving obstacles"};
  app.require_subcommand(1);

  std::string config;
  std::string safe;
  Overrides ov;
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write events.jsonl");
  CLI::App* trial = app.add_subcommand("trial", "Run a randomized grid trial");
  CLI::App* slice = app.add_subcommand("deb-slice", "Sample dynamic expanded bubbles on a joint plane");
  for (CLI::App* c : {run, trial, slice}) add_common(c, config, ov, safe);
  CLI::App* validate = app.add_subcommand("validate", "Re-parse output files");
  std::string target;
  validate->add_option("path", target, "Output directory or file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : drgbt::commands::kConfigError;
  }

  try {
    if (validate->parsed()) return drgbt::commands::cmd_validate(target, std::cout);
    if (!safe.empty()) ov.safe = safe == "on";
    const drgbt::config::AppConfig cfg = drgbt::commands::resolve_config(config, ov);
    if (run->parsed()) return drgbt::commands::cmd_run(cfg, std::cout);
    if (trial->parsed()) return drgbt::commands::cmd_trial(cfg, std::cout);
    return drgbt::commands::cmd_deb_slice(cfg, std::cout);
  } catch (const drgbt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return drgbt::commands::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return drgbt::commands::kConfigError;
  }
}
