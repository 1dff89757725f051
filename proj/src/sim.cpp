#include "drgbt/sim.hpp"

#include "drgbt/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace drgbt::sim {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) { return splitmix(seed ^ splitmix(stream + 1)); }

bool collision_free(const RobotModel& model, const Configuration& q, const Environment& env) {
  if (!model.chain.joint_limits.contains(q)) return false;
  return !in_collision(kinematics::forward_kinematics_unchecked(model.chain, q), env);
}

double effective_v_obs(const ScenarioSpec& spec) {
  if (spec.v_obs_per_iteration) return *spec.v_obs_per_iteration / spec.budget.T;
  return spec.v_obs;
}

}  // namespace

ScenarioSpec planar_preset() {
  ScenarioSpec s;
  s.name = "planar";
  s.robot = planar_robot({1.0, 1.0}, 0.05);
  s.workspace_center = Vec3::Zero();
  s.workspace_radius = 2.5;
  s.base_center = Vec3::Zero();
  s.planar = true;
  s.obstacle_params = {0, 0.1, false};
  s.v_obs = 0.5;
  s.rho0 = 2.0;
  s.planner.planning_margin = 0.01;
  return s;
}

ScenarioSpec xarm6_preset() {
  ScenarioSpec s;
  s.name = "xarm6";
  s.robot = xarm6_robot();
  s.workspace_center = Vec3(0.0, 0.0, 0.267);
  s.workspace_radius = 1.5;
  s.base_center = Vec3(0.0, 0.0, 0.267);
  Box table;
  table.center = Vec3(0.0, 0.0, -0.025);
  table.half_extents = Vec3(0.6, 0.6, 0.025);
  table.velocity = Vec3::Zero();
  s.fixtures = {table};
  s.obstacle_params = {0, 0.01, false};
  s.v_obs = 1.6;
  s.rho0 = 2.0;
  s.planner.planning_margin = 0.01;
  return s;
}

ScenarioSpec xarm6_large_preset() {
  ScenarioSpec s = xarm6_preset();
  s.name = "xarm6_large";
  s.obstacle_params.size = 0.3;
  return s;
}

ScenarioSpec preset_by_name(const std::string& name) {
  if (name == "planar") return planar_preset();
  if (name == "xarm6") return xarm6_preset();
  if (name == "xarm6_large") return xarm6_large_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

double base_exclusion_radius(const ScenarioSpec& spec) {
  if (spec.base_exclusion) return *spec.base_exclusion;
  const double omega1 = spec.robot.limits.omega_max[0];
  return std::max(effective_v_obs(spec) / omega1, spec.robot.chain.base_radius);
}

Environment make_environment(const ScenarioSpec& spec, std::mt19937_64& rng) {
  Environment env;
  env.fixtures = spec.fixtures;
  env.workspace_center = spec.workspace_center;
  env.workspace_radius = spec.workspace_radius;
  env.base_center = spec.base_center;
  env.base_exclusion = base_exclusion_radius(spec);
  env.v_obs = effective_v_obs(spec);
  env.planar = spec.planar;
  env.obstacles = spec.obstacles;
  for (const auto& b : env.obstacles) {
    if (b.velocity.norm() > env.v_obs + 1e-12) throw ConfigError("obstacle speed exceeds v_obs");
  }
  std::vector<Box> random = spawn_random_obstacles(env, spec.obstacle_params, rng);
  env.obstacles.insert(env.obstacles.end(), random.begin(), random.end());
  return env;
}

std::pair<Configuration, Configuration> generate_start_goal(const ScenarioSpec& spec, const Environment& env,
                                                            std::mt19937_64& rng) {
  const RobotModel planning = spec.robot.inflated(spec.planner.planning_margin);
  const auto& limits = spec.robot.chain.joint_limits;
  cspace::Sampler sampler(rng());
  if (spec.q_start && spec.q_goal) {
    if (spec.q_start->size() != spec.robot.dof() || spec.q_goal->size() != spec.robot.dof()) {
      throw DimensionMismatch("scenario start/goal size does not match the robot");
    }
    if (!collision_free(planning, *spec.q_start, env) || !collision_free(planning, *spec.q_goal, env)) {
      throw ScenarioGenerationFailed("fixed start or goal is in collision at t = 0");
    }
    return {*spec.q_start, *spec.q_goal};
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Configuration qs = spec.q_start ? *spec.q_start : sampler.sample_uniform(limits);
    const Configuration qg = spec.q_goal ? *spec.q_goal : sampler.sample_uniform(limits);
    if (!(cspace::metric_rho(qs, qg) > spec.rho0)) continue;
    if (!collision_free(planning, qs, env) || !collision_free(planning, qg, env)) continue;
    return {qs, qg};
  }
  throw ScenarioGenerationFailed("no collision-free start/goal pair after 10^4 attempts");
}

Scenario make_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.robot.validate();
  Scenario sc;
  sc.seed = seed;
  sc.spec = spec;
  std::mt19937_64 rng(derive(seed, 0));
  sc.env = make_environment(spec, rng);
  auto [qs, qg] = generate_start_goal(spec, sc.env, rng);
  sc.q_start = std::move(qs);
  sc.q_goal = std::move(qg);
  return sc;
}

const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::Goal:
      return "goal";
    case RunOutcome::CollisionI:
      return "collision_I";
    case RunOutcome::CollisionII:
      return "collision_II";
    case RunOutcome::Timeout:
      return "timeout";
  }
  return "?";
}

RunMetrics run_scenario(const Scenario& sc, const RunHooks& hooks) {
  const ScenarioSpec& spec = sc.spec;
  const scheduler::TaskBudget& budget = spec.budget;
  if (!scheduler::check_schedulability(scheduler::tasks_of(budget))) throw ConfigError("task set is not schedulable");

  planner::DrgbtParams params = spec.planner;
  params.T = budget.T;
  params.e1 = budget.e1;
  params.v_obs = sc.env.v_obs;

  planner::Planner planner(spec.robot, params, sc.q_start, sc.q_goal, derive(sc.seed, 1));
  planner.record_splines(hooks.record_splines);
  replanner::Replanner replanner(planner.planning_model(), spec.replanner, derive(sc.seed, 2));

  RunMetrics m;
  Environment env = sc.env;
  {
    scheduler::BudgetClock clock = scheduler::make_clock(spec.init_plan_budget, spec.sched);
    const auto path = replanner.replan(sc.q_start, sc.q_goal, env, clock);
    if (path) {
      planner.install_path(*path);
      m.initial_path = true;
    } else {
      planner.request_replanning();
    }
  }

  const long max_iters = static_cast<long>(std::ceil(spec.max_runtime / budget.T - 1e-9));
  const auto t_start = std::chrono::steady_clock::now();
  for (long it = 0; it < max_iters; ++it) {
    const scheduler::IterationReport rep = scheduler::run_iteration(planner, replanner, env, budget, spec.sched);
    ++m.iterations;
    if (rep.deadline_overrun) ++m.deadline_overruns;
    if (rep.replan_attempted) ++m.replans_requested;
    if (rep.replan_succeeded) ++m.replans_succeeded;
    if (rep.outcome.fallback) ++m.fallbacks;
    if (hooks.on_iteration) hooks.on_iteration({it, static_cast<double>(it) * budget.T, rep});

    env = advance_obstacles(env, budget.T);
    if (spec.sched.realtime && spec.sched.mode == scheduler::BudgetMode::Wall) {
      std::this_thread::sleep_until(t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                  std::chrono::duration<double>(budget.T * static_cast<double>(it + 1))));
    }

    const auto kind = rep.outcome.kind;
    if (kind == planner::OutcomeKind::ReachedGoal) {
      m.outcome = RunOutcome::Goal;
      m.success = true;
      break;
    }
    if (kind == planner::OutcomeKind::CollisionI) {
      m.outcome = RunOutcome::CollisionI;
      break;
    }
    if (kind == planner::OutcomeKind::CollisionII) {
      m.outcome = RunOutcome::CollisionII;
      break;
    }
  }
  m.algorithm_time = static_cast<double>(m.iterations) * budget.T;
  const auto& trav = planner.traversed();
  for (std::size_t i = 1; i < trav.size(); ++i) m.path_length += cspace::metric_rho(trav[i - 1], trav[i]);
  if (hooks.on_finish) hooks.on_finish(planner);
  return m;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t cell, int run) {
  return derive(derive(base, static_cast<std::uint64_t>(cell)), static_cast<std::uint64_t>(run));
}

CellRow summarize(const CellKey& key, const std::vector<RunMetrics>& runs) {
  CellRow row;
  row.cell = key;
  row.runs = static_cast<int>(runs.size());
  std::vector<double> times;
  std::vector<double> lengths;
  for (const auto& r : runs) {
    switch (r.outcome) {
      case RunOutcome::Goal:
        times.push_back(r.algorithm_time);
        lengths.push_back(r.path_length);
        break;
      case RunOutcome::CollisionI:
        ++row.collisions_I;
        break;
      case RunOutcome::CollisionII:
        ++row.collisions_II;
        break;
      case RunOutcome::Timeout:
        ++row.timeouts;
        break;
    }
  }
  const auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  // Time and length statistics are over successful runs only.
  stats(times, row.time_mean, row.time_std);
  stats(lengths, row.length_mean, row.length_std);
  row.success_rate = runs.empty() ? 0.0 : static_cast<double>(times.size()) / static_cast<double>(runs.size());
  return row;
}

TrialResult run_trial(const ScenarioSpec& spec, const TrialGrid& grid) {
  if (grid.runs_per_cell < 1) throw ConfigError("runs_per_cell must be at least 1");
  struct Cell {
    CellKey key;
    ScenarioSpec spec;
  };
  std::vector<Cell> cells;
  const std::vector<double> u1s = grid.u1_values.empty() ? std::vector<double>{-1.0} : grid.u1_values;
  for (double T : grid.T_values) {
    for (double u1 : u1s) {
      for (int n_obs : grid.n_obs_values) {
        if (n_obs < 0) throw ConfigError("n_obs must be nonnegative");
        Cell c;
        c.spec = spec;
        const double e1 = u1 > 0.0 ? u1 * T : std::min(spec.budget.e1, T);
        c.spec.budget = scheduler::TaskBudget::make(T, e1);
        if (!scheduler::check_schedulability(scheduler::tasks_of(c.spec.budget))) {
          throw ConfigError("cell with T = " + std::to_string(T) + " is not schedulable");
        }
        c.spec.obstacle_params.n_obs = n_obs;
        c.key = {T, e1, e1 / T, n_obs};
        cells.push_back(std::move(c));
      }
    }
  }

  struct Job {
    std::size_t cell;
    int run;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int r = 0; r < grid.runs_per_cell; ++r) jobs.push_back({c, r});
  }

  std::vector<RunRow> rows(jobs.size());
  std::vector<std::vector<scheduler::IterationTiming>> timings(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        const Cell& cell = cells[jobs[j].cell];
        const std::uint64_t seed = run_seed(grid.seed, jobs[j].cell, jobs[j].run);
        const Scenario sc = make_scenario(cell.spec, seed);
        RunHooks hooks;
        auto& sink = timings[j];
        hooks.on_iteration = [&sink](const IterationEvent& ev) { sink.push_back(ev.report.timing); };
        rows[j] = {cell.key, jobs[j].run, seed, run_scenario(sc, hooks)};
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };

  const int threads = std::max(1, grid.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  TrialResult out;
  out.runs = std::move(rows);
  for (auto& t : timings) out.timings.insert(out.timings.end(), t.begin(), t.end());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<RunMetrics> ms;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].cell == c) ms.push_back(out.runs[j].metrics);
    }
    out.cells.push_back(summarize(cells[c].key, ms));
  }
  return out;
}

}  // namespace drgbt::sim
