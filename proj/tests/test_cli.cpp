#include "drgbt/commands.hpp"
#include "drgbt/config.hpp"
#include "drgbt/errors.hpp"
#include "drgbt/output.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>
#include <sstream>
#include <sys/wait.h>

using namespace drgbt;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    config::parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drgbt_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRGBT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cfg_path(const std::string& name) { return std::string(DRGBT_CONFIG_DIR) + "/" + name; }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, SyntaxErrorCarriesLine) {
  const std::string msg = config_error(slurp(cfg_path("malformed.json")));
  EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
}

TEST(Config, BadKeysAndValuesCarryLine) {
  std::string msg = config_error("{\n  \"preset\": \"planar\",\n  \"bogus\": 1\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = config_error("{\n  \"preset\": \"planar\",\n  \"budget\": {\n    \"T\": 0.05,\n    \"e1\": 0.08\n  }\n}");
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
  msg = config_error("{\n  \"preset\": \"planar\",\n  \"scenario\": {\"q_start\": [0, 1, 2]}\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = config_error("{\"preset\": \"nope\"}");
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
}

TEST(Config, ParsesSections) {
  const auto cfg = config::parse_config(R"({
    "preset": "planar",
    "seed": 17,
    "scenario": {"n_obs": 4, "v_obs": 0.5, "max_runtime": 3},
    "budget": {"T": 0.1, "u1": 0.5, "mode": "virtual"},
    "planner": {"N_h0": 12, "safe_on": "on"},
    "trial": {"T_values": [0.05], "n_obs_values": [1, 2], "runs_per_cell": 3}
  })");
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.spec.obstacle_params.n_obs, 4);
  EXPECT_EQ(cfg.spec.v_obs, 0.5);
  EXPECT_EQ(cfg.spec.budget.T, 0.1);
  EXPECT_EQ(cfg.spec.budget.e1, 0.05);
  EXPECT_EQ(cfg.spec.budget.e2, 0.1 - 0.05);
  EXPECT_EQ(cfg.spec.sched.mode, scheduler::BudgetMode::Virtual);
  EXPECT_EQ(cfg.spec.planner.N_h0, 12);
  EXPECT_TRUE(cfg.spec.planner.safe_on);
  EXPECT_EQ(cfg.trial.n_obs_values, (std::vector<int>{1, 2}));
  EXPECT_EQ(cfg.trial.runs_per_cell, 3);
}

TEST(Config, RobotModelDocument) {
  const auto m = config::parse_robot_model(R"({
    "joint_offsets": [[0, 0, 0], [1, 0, 0]],
    "joint_axes": [[0, 0, 1], [0, 0, 1]],
    "tool_offset": [1, 0, 0],
    "link_radii": [0.05, 0.05]
  })");
  EXPECT_EQ(m.dof(), 2);
  const auto pose = kinematics::forward_kinematics(m.chain, Eigen::Vector2d(0, 0));
  EXPECT_NEAR((pose.tip() - oracle::Vec3(2, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_THROW(config::parse_robot_model(R"({"joint_offsets": [[0,0,0]], "joint_axes": [[0,0,1]]})"), ConfigError);
}

TEST(Config, EnvironmentAndFlagPrecedence) {
  const std::string path = cfg_path("planar_free.json");
  commands::Overrides ov;
  ::unsetenv("DRGBT_SEED");
  ::unsetenv("DRGBT_OUT");
  EXPECT_EQ(commands::resolve_config(path, ov).seed, 1u);
  ::setenv("DRGBT_SEED", "23", 1);
  ::setenv("DRGBT_OUT", "/tmp/from_env", 1);
  auto cfg = commands::resolve_config(path, ov);
  EXPECT_EQ(cfg.seed, 23u);
  EXPECT_EQ(cfg.out, "/tmp/from_env");
  EXPECT_EQ(cfg.trial.seed, 23u);
  ov.seed = 99;
  ov.out = "/tmp/from_flag";
  cfg = commands::resolve_config(path, ov);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.out, "/tmp/from_flag");
  ov = {};
  ::setenv("DRGBT_SEED", "abc", 1);
  EXPECT_THROW(commands::resolve_config(path, ov), ConfigError);
  ov.use_env = false;
  EXPECT_EQ(commands::resolve_config(path, ov).seed, 1u);
  ::unsetenv("DRGBT_SEED");
  ::unsetenv("DRGBT_OUT");
  EXPECT_THROW(commands::resolve_config("no_such_config.json", {}), ConfigError);
}

TEST(Output, NumberFormat) {
  for (double x : {0.1, 1.0 / 3.0, 1e-17, 12345.678, -0.0, 0.05}) EXPECT_EQ(std::stod(output::fmt(x)), x);
  EXPECT_EQ(output::fmt(0.5), "0.5");
}

TEST(Output, ValidatorRejectsCorruption) {
  std::ostringstream runs;
  output::write_runs_csv(runs, {});
  EXPECT_TRUE(output::validate_csv(runs.str(), output::kRunsHeader).ok);
  EXPECT_FALSE(output::validate_csv("T,e1\n1,2\n", output::kRunsHeader).ok);
  std::ostringstream slice;
  output::write_slice_csv(slice, {{0, {0.1, 0.2, 0.0, true}}});
  EXPECT_TRUE(output::validate_csv(slice.str(), output::kSliceHeader).ok);
  EXPECT_FALSE(output::validate_csv(slice.str() + "0,1,2\n", output::kSliceHeader).ok);
  EXPECT_FALSE(output::validate_jsonl("{\"iteration\": 0}\n").ok);
  EXPECT_FALSE(output::validate_jsonl("not json\n").ok);
}

TEST(Commands, MiniGridAndReproducibility) {
  auto cfg = commands::resolve_config(cfg_path("mini_grid.json"), {});
  const fs::path a = temp_dir("grid_a"), b = temp_dir("grid_b");
  std::ostringstream log;
  cfg.out = a.string();
  ASSERT_EQ(commands::cmd_trial(cfg, log), commands::kGoal);
  cfg.out = b.string();
  cfg.trial.threads = 4;
  ASSERT_EQ(commands::cmd_trial(cfg, log), commands::kGoal);
  const std::string trial = slurp(a / "trial.csv");
  EXPECT_EQ(line_count(trial), 1u + 9u);
  EXPECT_EQ(line_count(slurp(a / "runs.csv")), 1u + 9u * 2u);
  EXPECT_EQ(slurp(a / "runs.csv"), slurp(b / "runs.csv"));
  EXPECT_EQ(commands::cmd_validate(a.string(), log), commands::kGoal);
  std::ofstream(a / "trial.csv", std::ios::app) << "garbage\n";
  EXPECT_EQ(commands::cmd_validate(a.string(), log), commands::kConfigError);
}

TEST(Commands, U1SweepColumns) {
  auto cfg = commands::resolve_config(cfg_path("u1_sweep.json"), {});
  cfg.trial.runs_per_cell = 1;
  cfg.trial.T_values = {0.05};
  const fs::path dir = temp_dir("u1");
  cfg.out = dir.string();
  std::ostringstream log;
  ASSERT_EQ(commands::cmd_trial(cfg, log), commands::kGoal);
  const std::string trial = slurp(dir / "trial.csv");
  EXPECT_NE(trial.find("0.05,0.05,1,5,"), std::string::npos) << trial;
  EXPECT_NE(trial.find("0.05,0.025,0.5,5,"), std::string::npos) << trial;
}

TEST(Commands, DebSliceNestingAndDiamond) {
  auto cfg = commands::resolve_config(cfg_path("deb_slice_planar.json"), {});
  cfg.deb.resolution = 61;
  const auto rows = commands::deb_slice_rows(cfg);
  ASSERT_EQ(rows.size(), cfg.deb.roots.size() * 61u * 61u * 4u);
  // Same grid point across velocities is contiguous per root in v order; count per (root, v).
  std::map<std::pair<int, double>, int> counts;
  std::map<std::tuple<int, double, double>, std::vector<bool>> by_point;
  for (const auto& r : rows) {
    counts[{r.root, r.sample.v_obs}] += r.sample.inside ? 1 : 0;
    by_point[{r.root, r.sample.x, r.sample.y}].push_back(r.sample.inside);
  }
  for (const auto& [key, flags] : by_point) {
    for (std::size_t i = 1; i < flags.size(); ++i) ASSERT_LE(flags[i], flags[i - 1]);
  }
  // v = 0 is the static diamond rooted at each configuration.
  sim::Environment env;
  env.obstacles = cfg.spec.obstacles;
  for (std::size_t k = 0; k < cfg.deb.roots.size(); ++k) {
    const auto& root = cfg.deb.roots[k];
    const auto pose = kinematics::forward_kinematics_unchecked(cfg.spec.robot.chain, root);
    const auto r = kinematics::enclosing_radii(pose).r;
    const auto prof = geometry::compute_distance_profile(pose.link_capsules, env.obstacles, {}, cfg.spec.planner.d_max);
    for (const auto& row : rows) {
      if (row.root != static_cast<int>(k) || row.sample.v_obs != 0.0) continue;
      ASSERT_EQ(row.sample.inside,
                oracle::deb_member(r, prof.profile.d, root, Eigen::Vector2d(row.sample.x, row.sample.y), 0.0, 0.0));
    }
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = temp_dir("exit");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("run --config " + cfg_path("planar_free.json") + out), 0);
  EXPECT_EQ(run_cli("validate " + dir.string()), 0);
  EXPECT_EQ(run_cli("run --config " + cfg_path("collision.json") + out), 2);
  EXPECT_EQ(run_cli("run --config " + cfg_path("timeout.json") + out), 3);
  EXPECT_EQ(run_cli("run --config " + cfg_path("malformed.json") + out), 1);
  EXPECT_EQ(run_cli("run --config missing.json" + out), 1);
  EXPECT_EQ(run_cli("run --config planar --budget-mode cpu" + out), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
}
