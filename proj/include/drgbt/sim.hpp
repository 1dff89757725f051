#pragma once

#include "drgbt/budget.hpp"
#include "drgbt/environment.hpp"
#include "drgbt/planner.hpp"
#include "drgbt/replanner.hpp"
#include "drgbt/robot.hpp"
#include "drgbt/scheduler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace drgbt::sim {

using cspace::Configuration;

/// Everything needed to build scenarios of one kind; random parts (obstacles,
/// start/goal unless fixed) are drawn per seed.
struct ScenarioSpec {
  std::string name{"custom"};
  RobotModel robot;
  std::vector<Box> fixtures;
  std::vector<Box> obstacles;         // explicit obstacles, used in addition to random ones
  Vec3 workspace_center{Vec3::Zero()};
  double workspace_radius{1.5};
  Vec3 base_center{Vec3::Zero()};
  std::optional<double> base_exclusion;  // default max(v_obs / omega_1, base radius)
  bool planar{false};
  ObstacleParams obstacle_params;
  double v_obs{1.6};
  /// Speed cap given per iteration (m per period); overrides v_obs as cap / T.
  std::optional<double> v_obs_per_iteration;
  double rho0{2.0};
  double max_runtime{10.0};
  double init_plan_budget{1.0};  // seconds of replanner budget before the first iteration
  std::optional<Configuration> q_start;
  std::optional<Configuration> q_goal;
  scheduler::TaskBudget budget{scheduler::TaskBudget::make(0.05, 0.03)};
  scheduler::SchedulerOptions sched;
  planner::DrgbtParams planner;
  replanner::ReplannerParams replanner;
};

struct Scenario {
  std::uint64_t seed{0};
  ScenarioSpec spec;
  Environment env;
  Configuration q_start;
  Configuration q_goal;
};

/// 2-DoF planar arm with unit links among boxes moving in its plane.
ScenarioSpec planar_preset();
/// 6-DoF arm on a table among 1 cm cubes in a 1.5 m workspace sphere.
ScenarioSpec xarm6_preset();
/// Same with 30 cm cubes.
ScenarioSpec xarm6_large_preset();
/// Throws ConfigError for an unknown name.
ScenarioSpec preset_by_name(const std::string& name);

double base_exclusion_radius(const ScenarioSpec& spec);

/// Builds the environment (explicit plus random obstacles) for `seed`.
Environment make_environment(const ScenarioSpec& spec, std::mt19937_64& rng);

/// Rejection-samples q_start, q_goal that are collision-free at t = 0 (for the
/// planning model) with rho(q_start, q_goal) > rho0. Throws
/// ScenarioGenerationFailed after 10^4 rejections.
std::pair<Configuration, Configuration> generate_start_goal(const ScenarioSpec& spec, const Environment& env,
                                                            std::mt19937_64& rng);

Scenario make_scenario(const ScenarioSpec& spec, std::uint64_t seed);

enum class RunOutcome { Goal, CollisionI, CollisionII, Timeout };
const char* to_string(RunOutcome o);

struct RunMetrics {
  bool success{false};
  RunOutcome outcome{RunOutcome::Timeout};
  double algorithm_time{0.0};
  double path_length{0.0};
  long iterations{0};
  long deadline_overruns{0};
  long replans_requested{0};
  long replans_succeeded{0};
  long fallbacks{0};
  bool initial_path{false};
};

struct IterationEvent {
  long iteration{0};
  double time{0.0};
  scheduler::IterationReport report;
};

struct RunHooks {
  std::function<void(const IterationEvent&)> on_iteration;
  /// Called once with the finished planner (splines, traversed path).
  std::function<void(const planner::Planner&)> on_finish;
  bool record_splines{false};
};

RunMetrics run_scenario(const Scenario& sc, const RunHooks& hooks = {});

struct TrialGrid {
  std::vector<double> T_values{0.05};
  std::vector<int> n_obs_values{0};
  /// e1 = u1 * T for each entry; when empty, the scenario's fixed e1 is used.
  std::vector<double> u1_values;
  int runs_per_cell{10};
  std::uint64_t seed{1};
  int threads{1};
};

struct CellKey {
  double T{0.0};
  double e1{0.0};
  double u1{0.0};
  int n_obs{0};
};

struct RunRow {
  CellKey cell;
  int run{0};
  std::uint64_t seed{0};
  RunMetrics metrics;
};

struct CellRow {
  CellKey cell;
  int runs{0};
  double success_rate{0.0};
  double time_mean{0.0};
  double time_std{0.0};
  double length_mean{0.0};
  double length_std{0.0};
  int collisions_I{0};
  int collisions_II{0};
  int timeouts{0};
};

struct TrialResult {
  std::vector<CellRow> cells;
  std::vector<RunRow> runs;
  std::vector<scheduler::IterationTiming> timings;
};

/// Seed of run `run` of cell `cell` derived from the grid seed.
std::uint64_t run_seed(std::uint64_t base, std::size_t cell, int run);

/// Runs every cell of the grid; runs are independent and spread over
/// `threads` workers, results ordered by cell then run.
TrialResult run_trial(const ScenarioSpec& spec, const TrialGrid& grid);

CellRow summarize(const CellKey& key, const std::vector<RunMetrics>& runs);

}  // namespace drgbt::sim
